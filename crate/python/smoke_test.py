#!/usr/bin/env python3
"""Smoke test for the fht_channel Python extension.

Build the module first:

    cargo build --release -p fht-channel-py

then run this script; it locates the compiled cdylib, copies it next to
itself under the importable name, and exercises the bindings.
"""

import math
import shutil
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
ROOT = HERE.parent


def locate_module() -> None:
    target = HERE / "fht_channel.so"
    candidates = [
        ROOT / "target" / "release" / "libfht_channel_py.so",
        ROOT / "target" / "debug" / "libfht_channel_py.so",
        ROOT / "target" / "release" / "libfht_channel_py.dylib",
        ROOT / "target" / "debug" / "libfht_channel_py.dylib",
    ]
    built = [c for c in candidates if c.exists()]
    if not built:
        sys.exit("no compiled extension found; run: cargo build --release -p fht-channel-py")
    newest = max(built, key=lambda c: c.stat().st_mtime)
    if not target.exists() or target.stat().st_mtime < newest.stat().st_mtime:
        shutil.copy2(newest, target)
    sys.path.insert(0, str(HERE))


def approx(a: float, b: float, tol: float = 1e-12) -> bool:
    return abs(a - b) <= tol


def main() -> None:
    locate_module()
    import fht_channel as fc

    # normal helpers
    assert fc.std_normal_cdf(0.0) == 0.5
    assert approx(fc.std_normal_pdf(0.0), 1.0 / math.sqrt(2.0 * math.pi))
    assert approx(fc.expected_positive_flux(0.0, 1.0), fc.std_normal_pdf(0.0))

    params = fc.ChannelParams(0.0, 5.0, 2.0)
    assert params.lam == 5.0

    # classical density: exponent vanishes at t = lam / v0
    f5 = fc.ig_density(params, 1.0, 5.0)
    assert approx(f5, 5.0 / math.sqrt(500.0 * math.pi))
    assert approx(fc.ig_cdf(params, 1.0, 1e9), 1.0, 1e-9)

    # constant drift: corrected density reduces to IG times EPF(ell)/ell
    const = fc.DriftProfile.constant(1.0)
    for t in (0.5, 2.0, 7.0):
        s = math.sqrt(2.0 * t)
        ratio = fc.cig_density(params, const, t) / fc.ig_density(params, 1.0, t)
        assert approx(ratio, fc.expected_positive_flux(5.0, s) / 5.0)

    # pulsatile profile: displacement closed form and strictly positive density
    sin = fc.DriftProfile.sinusoidal(1.0, 2.0, 2.0 * math.pi)
    assert approx(sin.cumulative_displacement(1.0), 1.0)
    assert approx(sin.mu(0.25), 3.0)
    backflow = fc.cig_density(params, sin, 0.75)
    assert backflow > 0.0

    grid, pdf, cdf = fc.density_curve(params, sin, 5.0, 500)
    assert len(grid) == len(pdf) == len(cdf) == 500
    assert approx(grid[-1], 5.0)
    assert all(x >= 0.0 for x in pdf)
    assert all(b >= a for a, b in zip(cdf, cdf[1:]))

    # simulator: deterministic for a fixed seed
    hits1, censored1 = fc.simulate(params, const, 2000, 0.01, 20.0, seed=42)
    hits2, censored2 = fc.simulate(params, const, 2000, 0.01, 20.0, seed=42)
    assert hits1 == hits2 and censored1 == censored2
    frac = len(hits1) / 2000.0
    assert 0.97 < frac <= 1.0, frac
    mean = sum(hits1) / len(hits1)
    assert abs(mean - 5.0) < 0.4, mean

    # error mapping
    try:
        fc.ChannelParams(5.0, 5.0, 2.0)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError for ell <= x0")

    print("smoke test passed")


if __name__ == "__main__":
    main()
