"""Run the standard certificate suite and print a readable report.

    python3 demos/certificate_report.py [--samples 20000]

Each certificate checks one inequality at many points and keeps the
smallest margin; it passes when that margin beats the quadrature budget.
"""

from __future__ import annotations

import argparse
import time

from sqgpatch.bounds import default_certificate_suite, search_delta_alpha


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=20_000, help="samples per sign-lemma certificate")
    parser.add_argument("--grid", type=int, default=10, help="bad-part grid size per axis")
    args = parser.parse_args()

    start = time.perf_counter()
    certs = default_certificate_suite(samples=args.samples, grid_n=args.grid)
    print(f"{'certificate':<18} {'alpha':>8} {'samples':>8} {'worst margin':>14} {'at':>24}  verdict")
    for c in certs:
        at = f"({c.worst_point[0]:.3g}, {c.worst_point[1]:.3g})"
        print(f"{c.name:<18} {c.alpha:8.4f} {c.sample_count:8d} {c.worst_margin:14.6g} {at:>24}  "
              f"{'pass' if c.verdict else 'FAIL'}")
    print(f"\n{sum(c.verdict for c in certs)}/{len(certs)} certificates pass ({time.perf_counter() - start:.1f} s)")

    print("\nlargest grid value below which the near-axis drift bounds hold:")
    for alpha in (1 / 30, 0.03, 0.02, 0.01):
        print(f"  alpha={alpha:.4f}  delta_alpha={search_delta_alpha(alpha)}")


if __name__ == "__main__":
    main()
