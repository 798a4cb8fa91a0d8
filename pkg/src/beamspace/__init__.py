"""Downlink millimetre-wave beamspace MU-MIMO system-level simulator."""
from .channel import (AntennaPattern, DistanceUnit, Lobe, NoiseModel, PathLossParams,
                      db_to_linear, directivity_gain, link_sinr, noise_power_dbm, path_loss_db,
                      pencil_snr, shannon_rate, to_db)
from .environment import (MbsSpec, MueSpec, PathKind, PhysicalPath, Scenario, ScenarioError,
                          generate_random_scenario, load_scenario, reference_config_text)
from .grouping import ConflictSet, GroupingResult, detect_conflicts, group_users, next_cycle
from .power import (POLICIES, InterferenceMode, PolicyInfeasibleError, PowerAllocation, apa,
                    evaluate_rate, mu_siso, ppa_fair, ppa_unfair)
from .training import (BeamPair, TrainingReport, beam_combining, receive_training, train,
                       transmit_training)

__version__ = "0.1.0"
