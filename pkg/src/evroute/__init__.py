# routing and charging game of electric vehicles
from evroute.utils import (EvrouteError, ValidationError, PathExplosionError,
                           BudgetExceededError, UnsupportedPricingError,
                           NotConvergedError, NoConvergenceError,
                           NoEquilibriumError, BoundViolationError)
from evroute.model import (Edge, Station, EV, Action, Network, Scenario,
                           Profile, enumerate_paths, derive_occupancy,
                           validate_scenario, scenario_to_document)
from evroute.costs import (CostBreakdown, latency, pricing,
                           marginal_energy_price, ev_cost, potential,
                           social_cost, social_cost_closed_form,
                           sandwich_bounds, load_cost)
from evroute.equilibrium import (DynamicsTrace, optimize_load_1d,
                                 best_response, run_best_response_dynamics,
                                 is_nash, restricted_station_ne, enumerate_ne,
                                 multi_start_dynamics, distinct_terminals)
from evroute.analysis import (BoundReport, BalanceReport, social_optimum,
                              bound_report, price_of_anarchy,
                              price_of_stability, balance_report, poa_bound,
                              pos_bound, fleet_poa_limit)
from evroute.stochastic import (GroundModel, Pmf, sample_ground,
                                hoeffding_fleet_size, monte_carlo_guarantee,
                                discretize)
from evroute.prospect import (PTParams, PRESETS, prelec_weight, tversky_value,
                              reference_price, price_outcome,
                              prospect_displacement, expected_prospect,
                              pt_cost, pt_potential, pt_best_response,
                              pt_is_nash, pt_best_response_dynamics)

__version__ = '0.1.0'
