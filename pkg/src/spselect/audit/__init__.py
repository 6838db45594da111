from .impossibility import ImpossibilityResult, ParityReport, impossibility_search, parity_audit
from .ratio import approx_ratio_exact, approx_ratio_mc, opt_value
from .report import INFINITE, AuditReport, RatioEstimate
from .strategyproof import ScopeTooLarge, check_gsp, check_sp, replay, sample_scope
from .witness import WitnessReport, cycle_lower_bound_witness, gsp_lower_bound_witness

__all__ = [
    "INFINITE",
    "AuditReport",
    "ImpossibilityResult",
    "ParityReport",
    "RatioEstimate",
    "ScopeTooLarge",
    "WitnessReport",
    "approx_ratio_exact",
    "approx_ratio_mc",
    "check_gsp",
    "check_sp",
    "cycle_lower_bound_witness",
    "gsp_lower_bound_witness",
    "impossibility_search",
    "opt_value",
    "parity_audit",
    "replay",
    "sample_scope",
]
