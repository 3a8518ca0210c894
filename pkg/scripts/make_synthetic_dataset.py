#!/usr/bin/env python3
"""Write the bundled synthetic MovieLens-style dataset to a file.

Example:
    python scripts/make_synthetic_dataset.py --out data/synthetic/u.data
"""

import argparse

from reclab.synthetic import synthetic_ratings, write_movielens_100k


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output path (u.data layout)")
    parser.add_argument("--ratings", type=int, default=5000)
    parser.add_argument("--users", type=int, default=650)
    parser.add_argument("--items", type=int, default=600)
    parser.add_argument("--seed", type=int, default=13)
    args = parser.parse_args()

    ratings = synthetic_ratings(
        n_ratings=args.ratings, n_users=args.users, n_items=args.items, seed=args.seed
    )
    path = write_movielens_100k(args.out, ratings)
    print(f"wrote {len(ratings)} ratings to {path}")


if __name__ == "__main__":
    main()
