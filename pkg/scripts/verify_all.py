"""Run every acceptance criterion and print one line per criterion."""

import sys

from graphflow.verification import run_suite


def main():
    results = run_suite("all", echo=print)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
