# Validating candidate processes
#
# A process assigns each region an input as a function of all the other
# regions' outputs.  It is valid when, whatever deterministic operation each
# region applies, the resulting loop has exactly one consistent history.

# %%
from procfn import ProcessShape, ProcessTable, binary_operation, fixed_points
from procfn.catalog import asymmetric_four, copy_cycle_three, cyclic_four
from procfn.cli import render_verdict
from procfn.pfn import serialize_pfn
from procfn.validate import METHODS, validate

w = cyclic_four()
print(serialize_pfn(w))

# %% Every decider agrees on the four-region examples.

for process in (cyclic_four(), asymmetric_four()):
    print({m: validate(process, m).valid for m in METHODS})

# %% Running the loop by hand.  With every region copying its input to its
# output there is still just one fixed point.

ident = [binary_operation("id")] * 4
print(fixed_points(w, ident))
flip = [binary_operation("not")] * 4
print(fixed_points(w, flip))

# %% A two-region process where each region reads the other is invalid.
# The brute-force decider returns the operations that break it.

pair = ProcessTable(ProcessShape.binary(2), ((0, 1), (0, 1)))
print(render_verdict(validate(pair, "brute")))

# %% The pairwise rule is not enough on its own.  Three regions that copy
# each other around a cycle never signal both ways between any pair, yet
# the identity operations leave two histories and NOT leaves none.

cyc = copy_cycle_three()
for m in METHODS:
    print(render_verdict(validate(cyc, m)), end="")
print(fixed_points(cyc, [binary_operation("id")] * 3))
print(fixed_points(cyc, [binary_operation("not")] * 3))
