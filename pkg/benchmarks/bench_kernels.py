"""Timing comparison of the compiled and pure-Python kernel lanes.

Both lanes are imported directly (bypassing the TELEOGRASP_KERNELS switch) so
one process can measure forward kinematics, the geometric Jacobian, and
damped-least-squares IK side by side on identical inputs. Results are printed
as a per-call table with the speedup of the compiled lane.

Run from the repository root after an editable install:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --calls 20000 --ik-calls 500
"""

import argparse
import time

import numpy as np

from teleograsp import forward_kinematics
from teleograsp.models import planar_2r, spatial_6r
from teleograsp._kernels import _reference

try:
    from teleograsp._kernels import _fast
except ImportError:
    _fast = None


def _random_thetas(model, rng, count):
    lo = model._limits_min
    hi = model._limits_max
    span = hi - lo
    return [lo + span * (0.25 + 0.5 * rng.random_sample(len(lo))) for _ in range(count)]


def _time_per_call(fn, inputs, repeats):
    """Best-of-``repeats`` wall time for one pass over ``inputs``, per input."""
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for args in inputs:
            fn(*args)
        best = min(best, time.perf_counter() - start)
    return best / len(inputs)


def _bench_fk_and_jacobian(model, rng, calls, repeats):
    thetas = _random_thetas(model, rng, calls)
    shared = (model._params, model._base_matrix, model._tool_matrix)
    inputs = [(shared[0], t, shared[1], shared[2]) for t in thetas]
    rows = []
    for label, ref_fn, fast_fn in (
        ("fk_pose", _reference.fk_pose, getattr(_fast, "fk_pose", None)),
        ("jacobian", _reference.jacobian, getattr(_fast, "jacobian", None)),
    ):
        ref = _time_per_call(ref_fn, inputs, repeats)
        fast = _time_per_call(fast_fn, inputs, repeats) if fast_fn else None
        rows.append((f"{label} ({model.name})", len(inputs), fast, ref))
    return rows


def _bench_ik(model, rng, calls, repeats):
    lo = model._limits_min
    hi = model._limits_max
    seed = 0.5 * (lo + hi)
    inputs = []
    for theta_goal in _random_thetas(model, rng, calls):
        goal = forward_kinematics(model, theta_goal)
        inputs.append(
            (
                model._params,
                model._base_matrix,
                model._tool_matrix,
                lo,
                hi,
                model._task_rows,
                seed,
                goal.position,
                goal.orientation.as_array(),
                0.05,
                0.2,
                1e-4,
                1e-3,
                200,
            )
        )
    converged = sum(1 for args in inputs if _reference.ik_dls(*args)[1])
    ref = _time_per_call(_reference.ik_dls, inputs, repeats)
    fast = _time_per_call(_fast.ik_dls, inputs, repeats) if _fast else None
    label = f"ik_dls ({model.name}, {converged}/{calls} converged)"
    return [(label, calls, fast, ref)]


def _format_seconds(value):
    if value is None:
        return "unavailable"
    if value < 1e-3:
        return f"{value * 1e6:8.1f} us"
    return f"{value * 1e3:8.2f} ms"


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--calls", type=int, default=5000,
                        help="fk/jacobian evaluations per lane (default 5000)")
    parser.add_argument("--ik-calls", type=int, default=200,
                        help="IK solves per lane (default 200)")
    parser.add_argument("--repeats", type=int, default=3,
                        help="passes per measurement, best one kept (default 3)")
    parser.add_argument("--seed", type=int, default=0,
                        help="RNG seed for the sampled configurations (default 0)")
    args = parser.parse_args(argv)
    if args.calls < 1 or args.ik_calls < 1 or args.repeats < 1:
        parser.error("--calls, --ik-calls, and --repeats must be positive")

    rng = np.random.RandomState(args.seed)
    if _fast is None:
        print("compiled lane not importable; timing the pure-Python lane only")

    rows = []
    for model in (planar_2r(), spatial_6r()):
        rows.extend(_bench_fk_and_jacobian(model, rng, args.calls, args.repeats))
    rows.extend(_bench_ik(spatial_6r(), rng, args.ik_calls, args.repeats))

    width = max(len(row[0]) for row in rows)
    header = f"{'kernel':<{width}}  {'calls':>6}  {'compiled':>12}  {'pure python':>12}  speedup"
    print(header)
    print("-" * len(header))
    for label, calls, fast, ref in rows:
        speedup = f"{ref / fast:6.1f}x" if fast else "     --"
        print(
            f"{label:<{width}}  {calls:>6}  {_format_seconds(fast):>12}"
            f"  {_format_seconds(ref):>12}  {speedup}"
        )


if __name__ == "__main__":
    main()
