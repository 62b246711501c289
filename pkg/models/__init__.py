"""モデルパッケージ."""
from models.schemas import (
    CayleyBasisConfig,
    CheckReport,
    CheckResult,
    ComplexJSON,
    ConservationReport,
    ConservationRow,
    ConvergenceRow,
    RationalMapJSON,
    PoleJSON,
    ResolutionReportOutput,
    RunConfig,
    SolitonOutput,
    SpectralReport,
    ValidationReport,
)

__all__ = [
    "CayleyBasisConfig",
    "CheckReport",
    "CheckResult",
    "ComplexJSON",
    "ConservationReport",
    "ConservationRow",
    "ConvergenceRow",
    "RationalMapJSON",
    "PoleJSON",
    "ResolutionReportOutput",
    "RunConfig",
    "SolitonOutput",
    "SpectralReport",
    "ValidationReport",
]
