// A small JSON parse that keeps every number's source text. The results
// view displays metric values straight from the record's bytes; any
// JavaScript re-serialization could normalize a number (for example
// "1e-07" into "1e-7") and silently break the promise that the table shows
// exactly what the store holds.

export class RawNumber {
  constructor(
    readonly raw: string,
    readonly value: number,
  ) {}
}

export type LosslessValue =
  | RawNumber
  | string
  | boolean
  | null
  | LosslessValue[]
  | { [key: string]: LosslessValue };

const WHITESPACE = new Set([" ", "\t", "\n", "\r"]);

class Parser {
  private pos = 0;

  constructor(private readonly text: string) {}

  parse(): LosslessValue {
    this.skipWhitespace();
    const value = this.parseValue();
    this.skipWhitespace();
    if (this.pos !== this.text.length) {
      throw new SyntaxError(`trailing characters at position ${this.pos}`);
    }
    return value;
  }

  private skipWhitespace(): void {
    while (this.pos < this.text.length && WHITESPACE.has(this.text[this.pos]!)) {
      this.pos += 1;
    }
  }

  private parseValue(): LosslessValue {
    const ch = this.text[this.pos];
    if (ch === undefined) throw new SyntaxError("unexpected end of input");
    if (ch === "{") return this.parseObject();
    if (ch === "[") return this.parseArray();
    if (ch === '"') return this.parseString();
    if (ch === "t" || ch === "f" || ch === "n") return this.parseKeyword();
    return this.parseNumber();
  }

  private expect(ch: string): void {
    if (this.text[this.pos] !== ch) {
      throw new SyntaxError(`expected ${ch} at position ${this.pos}`);
    }
    this.pos += 1;
  }

  private parseObject(): { [key: string]: LosslessValue } {
    this.expect("{");
    const out: { [key: string]: LosslessValue } = {};
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

  private parseArray(): LosslessValue[] {
    this.expect("[");
    const out: LosslessValue[] = [];
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

  private parseString(): string {
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
        return JSON.parse(this.text.slice(start, this.pos)) as string;
      }
      this.pos += 1;
    }
    throw new SyntaxError("unterminated string");
  }

  private parseKeyword(): boolean | null {
    for (const [word, value] of [
      ["true", true],
      ["false", false],
      ["null", null],
    ] as const) {
      if (this.text.startsWith(word, this.pos)) {
        this.pos += word.length;
        return value;
      }
    }
    throw new SyntaxError(`invalid literal at position ${this.pos}`);
  }

  private parseNumber(): RawNumber {
    const match = /^-?(?:0|[1-9]\d*)(?:\.\d+)?(?:[eE][+-]?\d+)?/.exec(
      this.text.slice(this.pos),
    );
    if (!match) throw new SyntaxError(`invalid number at position ${this.pos}`);
    this.pos += match[0].length;
    return new RawNumber(match[0], Number(match[0]));
  }
}

export function losslessParse(text: string): LosslessValue {
  return new Parser(text).parse();
}

/** Follow a key path into a lossless tree; undefined when absent. */
export function losslessGet(
  value: LosslessValue,
  path: (string | number)[],
): LosslessValue | undefined {
  let current: LosslessValue | undefined = value;
  for (const step of path) {
    if (current === null || current === undefined || current instanceof RawNumber) {
      return undefined;
    }
    if (Array.isArray(current)) {
      if (typeof step !== "number") return undefined;
      current = current[step];
    } else if (typeof current === "object") {
      if (typeof step !== "string") return undefined;
      current = current[step];
    } else {
      return undefined;
    }
  }
  return current;
}
