# All valid three-region binary processes
#
# There are 2**12 candidate tables on three binary regions.  The search
# prunes with the pairwise rule and then keeps only tables that pass the
# exact check.

# %%
import numpy as np

from procfn import ProcessShape, ProcessTable
from procfn.equivalence import classify, group_order
from procfn.search import SearchPlan, enumerate_codes, pairwise_codes
from procfn.validate import brute_force_valid_codes

shape = ProcessShape.binary(3)
codes = enumerate_codes(SearchPlan(3))
print(len(codes))

# %% Cross-check against brute force over every table.

brute = np.flatnonzero(brute_force_valid_codes(shape, np.arange(4096)))
print(np.array_equal(np.sort(codes), brute))

# %% The pairwise-only set is larger; the extra tables form one class.

loose = pairwise_codes(SearchPlan(3, exact=False))
extra = sorted(set(loose.tolist()) - set(codes.tolist()))
print(len(loose), len(extra))
print(len(classify([ProcessTable.from_code(shape, c) for c in extra])))

# %% Up to relabelling of regions, inputs and outputs.

print(group_order(shape))
inv = classify([ProcessTable.from_code(shape, int(c)) for c in codes])
for rec in inv.records():
    print(rec.count, sorted(rec.flags))
