"""How one click exposes a container's memory layout.

The matrix-multiply fixture stores A row-major and B column-major. Nothing
in the program says so explicitly; asking "who shares a cache line with
this element" makes the layout obvious, because a 64-byte line holds 16
consecutive 4-byte addresses and the neighbors reveal which index runs
fastest.

Run:  python3 demos/layout_reveal.py
"""

import math

from moviz import cache, ir


def describe(name, idx, config, mm):
    mates = sorted(cache.line_mates(name, idx, config, mm))
    by_container = {}
    for c, i in mates:
        by_container.setdefault(c, []).append(i)
    print(f"\nclick {name}[{', '.join(map(str, idx))}] "
          f"(byte address {mm.address(name, idx)}):")
    for c, elems in by_container.items():
        rows = sorted({i[0] for i in elems})
        print(f"  {len(elems)} line mates in {c}, rows {rows}")
        print(f"    {', '.join(f'[{i},{j}]' for i, j in elems)}")


def main():
    program = ir.load_program_file("fixtures/matmul_aligned.json")
    config = cache.CacheConfig(line_size=64, capacity_threshold=math.inf)
    mm = cache.build_memory_map(program, {}, config)

    print("container placement (line size 64 B):")
    for name, p in mm.placements.items():
        print(f"  {name}: base {p.base:5d}  strides {p.strides}  "
              f"shape {p.shape}  span {p.span} B")

    # A's mates run along the second index: row-major, and the line even
    # wraps into the start of the next row
    describe("A", (0, 0), config, mm)
    # B's mates run along the FIRST index: column-major
    describe("B", (0, 1), config, mm)


if __name__ == "__main__":
    main()
