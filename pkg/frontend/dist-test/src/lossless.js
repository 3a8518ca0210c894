// A small JSON parse that keeps every number's source text. The results
// view displays metric values straight from the record's bytes; any
// JavaScript re-serialization could normalize a number (for example
// "1e-07" into "1e-7") and silently break the promise that the table shows
// exactly what the store holds.
export class RawNumber {
    raw;
    value;
    constructor(raw, value) {
        this.raw = raw;
        this.value = value;
    }
}
const WHITESPACE = new Set([" ", "\t", "\n", "\r"]);
class Parser {
    text;
    pos = 0;
    constructor(text) {
        this.text = text;
    }
    parse() {
        this.skipWhitespace();
        const value = this.parseValue();
        this.skipWhitespace();
        if (this.pos !== this.text.length) {
            throw new SyntaxError(`trailing characters at position ${this.pos}`);
        }
        return value;
    }
    skipWhitespace() {
        while (this.pos < this.text.length && WHITESPACE.has(this.text[this.pos])) {
            this.pos += 1;
        }
    }
    parseValue() {
        const ch = this.text[this.pos];
        if (ch === undefined)
            throw new SyntaxError("unexpected end of input");
        if (ch === "{")
            return this.parseObject();
        if (ch === "[")
            return this.parseArray();
        if (ch === '"')
            return this.parseString();
        if (ch === "t" || ch === "f" || ch === "n")
            return this.parseKeyword();
        return this.parseNumber();
    }
    expect(ch) {
        if (this.text[this.pos] !== ch) {
            throw new SyntaxError(`expected ${ch} at position ${this.pos}`);
        }
        this.pos += 1;
    }
    parseObject() {
        this.expect("{");
        const out = {};
        this.skipWhitespace();
        if (this.text[this.pos] === "}") {
            this.pos += 1;
            return out;
        }
        for (;;) {
            this.skipWhitespace();
            const key = this.parseString();
            this.skipWhitespace();
            this.expect(":");
            this.skipWhitespace();
            out[key] = this.parseValue();
            this.skipWhitespace();
            if (this.text[this.pos] === ",") {
                this.pos += 1;
                continue;
            }
            this.expect("}");
            return out;
        }
    }
    parseArray() {
        this.expect("[");
        const out = [];
        this.skipWhitespace();
        if (this.text[this.pos] === "]") {
            this.pos += 1;
            return out;
        }
        for (;;) {
            this.skipWhitespace();
            out.push(this.parseValue());
            this.skipWhitespace();
            if (this.text[this.pos] === ",") {
                this.pos += 1;
                continue;
            }
            this.expect("]");
            return out;
        }
    }
    parseString() {
        // Delegate escape handling to JSON.parse on the raw slice.
        this.expect('"');
        const start = this.pos - 1;
        while (this.pos < this.text.length) {
            const ch = this.text[this.pos];
            if (ch === "\\") {
                this.pos += 2;
                continue;
            }
            if (ch === '"') {
                this.pos += 1;
                return JSON.parse(this.text.slice(start, this.pos));
            }
            this.pos += 1;
        }
        throw new SyntaxError("unterminated string");
    }
    parseKeyword() {
        for (const [word, value] of [
            ["true", true],
            ["false", false],
            ["null", null],
        ]) {
            if (this.text.startsWith(word, this.pos)) {
                this.pos += word.length;
                return value;
            }
        }
        throw new SyntaxError(`invalid literal at position ${this.pos}`);
    }
    parseNumber() {
        const match = /^-?(?:0|[1-9]\d*)(?:\.\d+)?(?:[eE][+-]?\d+)?/.exec(this.text.slice(this.pos));
        if (!match)
            throw new SyntaxError(`invalid number at position ${this.pos}`);
        this.pos += match[0].length;
        return new RawNumber(match[0], Number(match[0]));
    }
}
export function losslessParse(text) {
    return new Parser(text).parse();
}
/** Follow a key path into a lossless tree; undefined when absent. */
export function losslessGet(value, path) {
    let current = value;
    for (const step of path) {
        if (current === null || current === undefined || current instanceof RawNumber) {
            return undefined;
        }
        if (Array.isArray(current)) {
            if (typeof step !== "number")
                return undefined;
            current = current[step];
        }
        else if (typeof current === "object") {
            if (typeof step !== "string")
                return undefined;
            current = current[step];
        }
        else {
            return undefined;
        }
    }
    return current;
}
