# # Human, automated and connected ego vehicles
#
# Fifteen vehicles queue at the start light of each bundled corridor. The
# last one is the ego; everybody else drives like a human. We swap the ego
# controller and compare what it burns between the first green and the
# final stop sign.

# %%
import tempfile
from pathlib import Path

from ecocorridor.energy import summarize
from ecocorridor.logio import write_log
from ecocorridor.scenario import bundled_scenario
from ecocorridor.traffic_sim import run_scenario

rows = []
logs = {}
for route in ("peachtree", "synthetic"):
    for ego in ("HV", "AV", "CAV"):
        sc = bundled_scenario(route, ego=ego, v2i_range=1200.0, composition="no_cav")
        log = run_scenario(sc)
        logs[(route, ego)] = log
        rows.append((route, ego, summarize(log), log.red_crossings, log.collisions))

# %%
print("route       ego   fuel [g]  time [s]  stops  brakings")
for route, ego, m, red, col in rows:
    print(f"{route:10s}  {ego:4s}  {m.fuel:8.1f}  {m.travel_time:8.1f}  {m.stops:5d}  "
          f"{m.braking_events:8d}")
assert all(red == 0 and col == 0 for *_, red, col in rows)

# %% [markdown]
# Relative to the human ego on the same corridor:

# %%
for route in ("peachtree", "synthetic"):
    base = summarize(logs[(route, "HV")])
    for ego in ("AV", "CAV"):
        m = summarize(logs[(route, ego)])
        print(f"{route:10s} {ego:4s} fuel {m.fuel / base.fuel:.3f}x, "
              f"travel time {m.travel_time / base.travel_time:.3f}x")

# %% [markdown]
# Every run can be written out as a step table for plotting elsewhere.

# %%
out = Path(tempfile.mkdtemp()) / "peachtree_cav.csv"
write_log(logs[("peachtree", "CAV")], out)
print(f"\nstep table written to {out} ({out.stat().st_size // 1024} KiB)")
