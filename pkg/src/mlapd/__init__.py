"""Online multi-level aggregation with deadlines.

Requests arrive on the nodes of a rooted, node-weighted tree and must each be
covered, within a [arrival, deadline] window, by a service — a timestamped
subtree containing the root.  This package provides the data model, three
online algorithms (noadd, double, waterfall), an exhaustive offline optimum
for small instances, seeded instance generators, and an analysis layer that
audits the exact accounting (prices, investments, charges) behind the
waterfall algorithm's D-competitiveness.
"""

from .algos import (ALGORITHMS, Double, FallResult, Investment,
                    InvestmentLedger, Noadd, PriceState, Waterfall,
                    build_algorithm)
from .analysis import (AnalysisReport, CheckResult, PairStatus, analyze,
                       charge_shares, classify_pairs, construct_charge_set,
                       invested_in,
                       invested_onward, pair_investment,
                       verify_investment_bounds, verify_phase_structure)
from .engine import OnlineView, RunTrace, ServiceRecord, measure_ratio, run
from .errors import (ConfigurationError, ContractViolation, InputError,
                     MlapdError, OracleBoundError, ValidationError)
from .gen import KINDS, GenSpec, generate, parse_gen
from .model import (Instance, Request, Schedule, Service, Tree, Verdict,
                    build_instance, check_feasible, instance_from_json,
                    instance_to_json, load_instance, parse_rational,
                    save_instance, schedule_cost, schedule_to_json,
                    service_cost)
from .oracle import (DEFAULT_MAX_REQUESTS, ORACLE_BACKEND, OptResult,
                     brute_force_opt, opt_including_times, reference_opt)

__version__ = "1.0.0"

__all__ = [
    "ALGORITHMS", "AnalysisReport", "CheckResult", "ConfigurationError",
    "ContractViolation", "DEFAULT_MAX_REQUESTS", "Double", "FallResult",
    "GenSpec", "InputError", "Instance", "Investment", "InvestmentLedger",
    "KINDS", "MlapdError", "Noadd", "ORACLE_BACKEND", "OnlineView",
    "OptResult", "OracleBoundError", "PairStatus", "PriceState", "Request",
    "RunTrace", "Schedule", "Service", "ServiceRecord", "Tree",
    "ValidationError", "Verdict", "Waterfall", "analyze", "brute_force_opt",
    "build_algorithm", "build_instance", "check_feasible", "classify_pairs",
    "charge_shares", "construct_charge_set", "generate", "instance_from_json",
    "instance_to_json", "invested_in", "invested_onward", "load_instance",
    "measure_ratio", "opt_including_times", "pair_investment",
    "parse_gen", "parse_rational", "reference_opt", "run", "save_instance",
    "schedule_cost", "schedule_to_json", "service_cost",
    "verify_investment_bounds", "verify_phase_structure",
]
