"""Stand-in external solver: reads an LP file, solves it in-process, writes name/value lines."""

import sys

from qtsp.milp import Status, parse_lp_file, solve_ilp, solve_lp


def main(lp_path, sol_path, mode="ok"):
    if mode == "crash":
        sys.exit(3)
    with open(lp_path) as fh:
        model = parse_lp_file(fh.read())
    result = solve_ilp(model) if model.has_integers() else solve_lp(model)
    if result.status is not Status.OPTIMAL:
        return
    with open(sol_path, "w") as fh:
        fh.write(f"=obj= {float(result.objective)!r}\n")
        for name, v in zip(model.names, result.x):
            fh.write(f"{name} {float(v)!r}\n")
        if mode == "alien":
            fh.write("ghost 1\n")


if __name__ == "__main__":
    main(*sys.argv[1:])
