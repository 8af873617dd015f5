# # Following a preceding vehicle
#
# The short-term layer looks T = 3 s ahead. It predicts where the vehicle in
# front will be, and then picks the effort-optimal end state that leaves the
# desired gap s_s + tau * v_f behind it.

# %%
from ecocorridor.cf_planner import car_following, ensemble

ego_s, ego_v = 0.0, 10.0

# %% [markdown]
# At the equilibrium gap (5 m + 1.5 s * 10 m/s) behind a leader at the same
# speed there is nothing to do.

# %%
steady = car_following(ego_s, ego_v, (20.0, 10.0, 0.0), v_des=17.8)
print(f"steady following: v_f {steady.v_f:.3f} m/s, s_f {steady.s_f:.3f} m, a {steady.accel:+.3f}")

# %% [markdown]
# Sweep the leader's distance: close leaders call for braking, far ones for
# an acceleration the free-flow plan will usually cap.

# %%
print("\ngap [m]  leader v  a_cf [m/s^2]")
for gap in (8.0, 15.0, 20.0, 30.0, 60.0):
    for v_lead in (0.0, 10.0):
        sol = car_following(ego_s, ego_v, (gap, v_lead, 0.0), v_des=17.8)
        print(f"{gap:6.0f}  {v_lead:8.1f}  {sol.accel:+8.2f}")

# %% [markdown]
# The ensemble takes the smaller of the free-flow and car-following commands.

# %%
a_ff = 0.4
for gap in (15.0, 60.0):
    a_cf = car_following(ego_s, ego_v, (gap, 10.0, 0.0), v_des=17.8).accel
    print(f"gap {gap:4.0f} m: a_ff {a_ff:+.2f}, a_cf {a_cf:+.2f} -> {ensemble(a_ff, a_cf):+.2f}")
