"""What-if analysis over symbolic sizes, without re-simulating anything.

Logical movement is a closed-form function of the program's symbols, so
scaling the stencil from 8x8x5 to 256x256x160 is a dictionary update, not
a new simulation. The compiled model makes reevaluation cheap enough to
drive a slider.

Run:  python3 demos/parametric_whatif.py
"""

import time

from moviz import heatmap, ir, movement


def main():
    program = ir.load_program_file("fixtures/hdiff.json")
    sizes = [
        {"I": 8, "J": 8, "K": 5},
        {"I": 32, "J": 32, "K": 16},
        {"I": 256, "J": 256, "K": 160},
    ]

    print("in_field read volume (boundary edge main#e0):")
    for bindings in sizes:
        metrics = movement.compute_metrics(program, bindings)
        label = ",".join(f"{k}={v}" for k, v in bindings.items())
        print(f"  {label:22} {metrics.edge_bytes['main#e0']:>14,} B")

    metrics = movement.compute_metrics(program, sizes[-1])
    scale = heatmap.fit([float(v) for v in metrics.edge_bytes.values()], "median")
    print("\nheat positions at the largest size (median scale):")
    for edge_id in sorted(metrics.edge_bytes):
        pos = heatmap.position(scale, float(metrics.edge_bytes[edge_id]))
        bar = "#" * round(40 * pos)
        print(f"  {edge_id:18} {pos:5.3f} {bar}")

    t0 = time.perf_counter()
    movement.reevaluate(program, {"I": 512, "J": 512, "K": 320})
    dt = (time.perf_counter() - t0) * 1000
    print(f"\nreevaluation at 512x512x320 took {dt:.2f} ms")


if __name__ == "__main__":
    main()
