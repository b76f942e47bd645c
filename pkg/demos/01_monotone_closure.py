"""Why one answer can settle many scenarios.

A scenario space is the product of each factor's ordered answer scale.
Because a sensible decision never gets worse when every input gets
better, recording one answer pins down every scenario above or below it.
"""

from emmkit import BINARY, ConflictError, make_lattice, new_partial

lattice = make_lattice([BINARY] * 3)
print(f"three yes/no factors span {lattice.point_count} scenarios:")
print(" ", lattice.points())

f = new_partial(lattice, BINARY)
print(f"\nfresh state: {f.determined_count()} of 8 determined")

print("\nrecord: scenario (yes, no, no) is acceptable")
f.record((1, 0, 0), 1)
for p in sorted(lattice.up_set((1, 0, 0))):
    print(f"  f{p} = {f.value_at(p)}   (settled, no question needed)")
print(f"determined: {f.determined_count()} of 8 after one answer")

print("\nrecord: scenario (no, yes, yes) is not acceptable")
f.record((0, 1, 1), 0)
print(f"determined: {f.determined_count()} of 8 after two answers")

print("\nanswers that contradict the order are refused, state unchanged:")
count_before = f.determined_count()
try:
    f.record((1, 1, 1), 0)  # everything above (1,0,0) is already a yes
except ConflictError as err:
    print(f"  {err}")
print(f"determined count still {f.determined_count()} (was {count_before})")

print("\nearly stop? complete pessimistically (min) or optimistically (max):")
print("  min extension:", f.min_extension().values())
print("  max extension:", f.max_extension().values())
