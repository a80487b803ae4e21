# Four regions
#
# 2**32 candidate tables is too many to test one by one, so the search
# builds tables region by region and only continues with combinations whose
# pairs are already compatible.  This takes under a minute.

# %%
import time

from procfn.search import SearchPlan, enumerate_and_classify, enumerate_codes, stderr_progress

t0 = time.perf_counter()
codes = enumerate_codes(SearchPlan(4), progress=stderr_progress(1.0))
print(len(codes), f"{time.perf_counter() - t0:.1f}s")

# %% Shards partition the work; their union is the whole set.

parts = [enumerate_codes(SearchPlan(4, shard_count=4, shard_index=k)) for k in range(4)]
print(sum(len(p) for p in parts))

# %% Classes under relabelling, and how many are genuinely non-causal.

inv = enumerate_and_classify(SearchPlan(4))
print(len(inv), inv.total, len(inv.genuinely_non_causal()))
