"""Smoke test for the ac_harnack extension module.

Build first with `pip install --no-build-isolation ./crates/python`
or `maturin develop -m crates/python/Cargo.toml`.
"""

import json
import math

import ac_harnack as ah


def check(cond, what):
    if not cond:
        raise SystemExit(f"FAIL {what}")
    print(f"ok {what}")


def main():
    p = ah.HarnackParams(0.5, -4.0, 2)
    c = p.constants()
    check(abs(c.a - 0.375) < 1e-15 and abs(c.b - 1.0) < 1e-15, "constants a, b")
    check(abs(c.q - math.sqrt(13.0) / 2.0) < 1e-12, "constant q")
    check(c.phi(1.0) > 0.0 and c.phi_dot(1.0) < 0.0, "phi positive and decreasing")
    check(ah.beta_admissible_max(0.5, 2, 0.0) >= -2.0 - 1e-12, "admissible beta")

    try:
        ah.HarnackParams(0.5, 1.0, 2)
    except ValueError:
        check(True, "inadmissible beta rejected")
    else:
        check(False, "inadmissible beta rejected")

    grid = ah.TorusGrid([2.0 * math.pi], [64])
    u0 = ah.generate_ic(grid, 1)
    check(len(u0) == 64 and 0.0 < min(u0) < max(u0) < 1.0, "initial condition in (0, 1)")

    traj = ah.evolve(grid, u0, 1.0, 0.05)
    check(len(traj) == len(traj.times) and traj.times[-1] == 1.0, "trajectory times")
    steps, lo, hi, breaches = traj.confinement()
    check(breaches == 0 and 0.0 < lo and hi < 1.0, "confinement")

    n1 = ah.HarnackParams.ricci_flat(1)
    rep = ah.verify_differential(traj, n1)
    check(rep.passed, "differential Harnack on T^1")
    check(json.loads(rep.to_json())["passed"] is True, "json report")
    rep = ah.verify_classical(traj, n1, pairs=20)
    check(rep.passed and len(rep.checks()) > 0, "classical Harnack on T^1")
    check(ah.classical_rhs_tight(n1, 1.0, 0.1, 1.0) >= ah.classical_rhs_paper(n1, 1.0, 0.1, 1.0),
          "tight bound dominates")

    xs = [-8.0 + 0.01 * i for i in range(1601)]
    ps, slope = ah.tanh_profile(xs)
    gap = ah.modica_bound_gap(xs, ps, slope)
    check(max(abs(g) for g in gap) < 1e-12, "modica gap vanishes on tanh")

    sx, sp, s0 = ah.shoot_standing_wave(8.0, 0.01)
    check(abs(s0 - 1.0 / math.sqrt(2.0)) < 1e-6, "standing wave slope at zero")

    _, _, _, crossings = ah.polynomial_comparison(2)
    expect = 0.36260572000269140
    check(len(crossings) == 2 and abs(crossings[1] - expect) < 1e-12, "crossings for n = 2")
    print("smoke test passed")


if __name__ == "__main__":
    main()
