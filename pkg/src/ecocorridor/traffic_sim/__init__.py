"""Single-lane microsimulation of a mixed HV / AV / CAV vehicle string."""
from .controllers import (CavDecision, av_acceleration, cav_step, hv_acceleration,
                          idm_acceleration, may_pass_signal, stop_obstacle)
from .params import IDMParams, Kind, SimParams
from .world import (Event, ScenarioLog, VehicleState, WorldState, bumper_gaps, initial_world,
                    run_scenario, step)

__all__ = [
    "CavDecision", "Event", "IDMParams", "Kind", "ScenarioLog", "SimParams", "VehicleState",
    "WorldState", "av_acceleration", "bumper_gaps", "cav_step", "hv_acceleration",
    "idm_acceleration", "initial_world", "may_pass_signal", "run_scenario", "step",
    "stop_obstacle",
]
