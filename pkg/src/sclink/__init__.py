"""sclink: throughput, electrical power and energy-per-bit modelling for
hybrid Raman/lumped amplified multi-band (S+C+L) optical links.

The pieces compose bottom-up: a WDM grid over a band plan
(:mod:`sclink.grid`), fiber spectral lookups (:mod:`sclink.fiber`),
measured amplifier efficiency and pump draw curves
(:mod:`sclink.measure`), the coupled signal/pump power evolution over a
span (:mod:`sclink.raman`), per-channel noise and Shannon throughput
(:mod:`sclink.quality`), the electrical power ledger
(:mod:`sclink.power`), swarm optimization of pump placement
(:mod:`sclink.pso`), and scenario assembly (:mod:`sclink.scenario`).
"""

from .fiber import (FiberSpec, attenuation_at, default_fiber, raman_gain,
                    triangular_raman_table)
from .grid import (Band, BandPlan, ChannelGrid, build_grid, cl_band_plan,
                   scl_band_plan)
from .measure import (EfficiencyCurve, PumpDrawCurve, default_efficiency_curve,
                      default_pump_draw_curve, efficiency_at,
                      load_efficiency_curve, load_pump_draw_curve,
                      pump_draw_at)
from .power import (PowerLedger, allocate_dra_power, band_electrical_power,
                    energy_per_bit, lumped_optical_output,
                    raman_electrical_power, total_power)
from .pso import OptimizeResult, SwarmConfig, optimize
from .quality import (AmplifierSpec, QualityReport, band_throughput,
                      channel_snr, dra_ase_power, excess_kurtosis,
                      lumped_ase_power, nli_power, qam_constellation)
from .raman import (PowerProfile, RamanPumpSet, coupling_matrix,
                    effective_integrals, no_pumps, on_off_gain, propagate)
from .scenario import (FitnessEvaluator, LinkScenario, ScenarioResult,
                       SolverOptions, evaluate_scenario, optimize_pumps)

__version__ = "0.1.0"
