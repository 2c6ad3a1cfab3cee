"""The dressing field of X1 on the ax+b group is -x^2 d/dx, so its flow
from a negative starting point leaves every bounded set in finite time.

Run: python3 demos/incomplete_flow.py
"""
from liedouble.catalog import axb_restricted_field
from liedouble.poisson import flow


def main():
    for x0 in (1.0, -1.0):
        traj = flow(axb_restricted_field, [x0], 0.0, 3.0, 0.01)
        exact = x0 / (traj.t[-1] * x0 + 1)
        print(f"x0 = {x0:+.1f}: steps={len(traj.t)} blowup={traj.blowup} "
              f"escape_time={traj.escape_time} last x={traj.states[-1].ravel()[0]:.6g} exact={exact:.6g}")


if __name__ == "__main__":
    main()
