# Conditional signalling
#
# Freezing the outputs of all but two regions leaves each of the pair's
# inputs as a function of the other's output.  In a valid process at most
# one of the two directions can carry a signal for each frozen setting.

# %%
import itertools

from procfn.analysis import causal_diagnosis, signalling_digraph, signalling_table
from procfn.catalog import asymmetric_four, causal_chain, cyclic_four
from procfn.cli import direction_text, render_signalling_table

w = cyclic_four()
print(render_signalling_table(signalling_table(w, (2, 3))))

# %% The direction changes with the frozen outputs, so every ordered pair of
# regions appears somewhere in the signalling digraph.

edges = signalling_digraph(w).edges
print(len(edges), sorted(edges)[:4])

# %% Listing one-way directions for every pair.

for pair in itertools.combinations(range(4), 2):
    rows = signalling_table(w, pair).rows
    print(pair[0] + 1, pair[1] + 1, [direction_text(r.direction) for r in rows])

# %% Causal structure.  A chain has a fixed order; the four-region examples
# have no region that is always first or always last.

for name, p in (("chain", causal_chain()), ("cyclic", cyclic_four()), ("asymmetric", asymmetric_four())):
    d = causal_diagnosis(p)
    print(name, d.fixed_order, d.dynamically_causal, d.genuinely_non_causal)
