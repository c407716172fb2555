"""Result records of the verification suite."""

from pydantic import BaseModel, Field

from src.analysis.models import DecayReport
from src.kernels.audit import KernelBoundAudit
from src.solver.models import PicardDiagnostics

CONTRACTION_RATIO_MAX = 0.5
RESIDUAL_FACTOR = 10.0
NORM_FACTOR = 1.1


class ReferenceCheck(BaseModel):
    """A numeric value compared with its closed form (Beta-integral identities, Young constant)."""

    name: str
    parameters: dict[str, float | str]
    numeric: float
    closed_form: float
    relative_error: float
    tolerance: float
    passed: bool

    @classmethod
    def compare(cls, name: str, parameters: dict, numeric: float, closed_form: float, tolerance: float):
        scale = max(abs(closed_form), 1e-300)
        error = abs(numeric - closed_form) / scale
        return cls(
            name=name,
            parameters=parameters,
            numeric=numeric,
            closed_form=closed_form,
            relative_error=error,
            tolerance=tolerance,
            passed=error <= tolerance,
        )


class SelfSimilarityCheck(BaseModel):
    """Collapse of t^{(d+1)/2} F_t(sqrt(t) y) between t and 4t."""

    t: float
    radii: list[float]
    max_gap: float
    tolerance: float
    passed: bool


class ContractionCheck(BaseModel):
    """Contraction of the Picard iteration read off its diagnostics.

    Passes when every contraction ratio is at most 0.5, the final residual
    is at most 10 times the stopping tolerance and the solution's K^1_alpha
    norm stays below 1.1 / (2 eta_hat).
    """

    name: str = "picard_contraction"
    ratios: list[float] = Field(default_factory=list)
    max_ratio: float = 0.0
    ratio_limit: float = CONTRACTION_RATIO_MAX
    residual: float | None = None
    residual_limit: float
    solution_norm: float | None = None
    norm_limit: float | None = None
    eta_hat: float | None = None
    iterations: int = 0
    passed: bool = False
    note: str = ""

    @classmethod
    def from_diagnostics(cls, diagnostics: PicardDiagnostics, tolerance: float) -> "ContractionCheck":
        ratios = list(diagnostics.contraction_ratios)
        max_ratio = max(ratios, default=0.0)
        residual_limit = RESIDUAL_FACTOR * tolerance
        norm = diagnostics.iterate_norms[-1] if diagnostics.iterate_norms else None
        limit = None if not diagnostics.eta_hat else NORM_FACTOR / (2.0 * diagnostics.eta_hat)

        notes = []
        if not diagnostics.converged:
            notes.append(f"not converged after {diagnostics.iterations} iterations")
        if max_ratio > CONTRACTION_RATIO_MAX:
            notes.append(f"contraction ratio {max_ratio:.3g} exceeds {CONTRACTION_RATIO_MAX}")
        if diagnostics.residual is None:
            notes.append("no residual recorded")
        elif diagnostics.residual > residual_limit:
            notes.append(f"residual {diagnostics.residual:.3g} exceeds {residual_limit:.3g}")
        if norm is None or limit is None:
            notes.append("no iterate norm or eta_hat recorded")
        elif norm > limit:
            notes.append(f"solution norm {norm:.4g} exceeds 1.1/(2 eta_hat) = {limit:.4g}")
        return cls(
            ratios=ratios,
            max_ratio=max_ratio,
            residual=diagnostics.residual,
            residual_limit=residual_limit,
            solution_norm=norm,
            norm_limit=limit,
            eta_hat=diagnostics.eta_hat,
            iterations=diagnostics.iterations,
            passed=not notes,
            note="; ".join(notes),
        )


class VerificationSuiteResult(BaseModel):
    decay_reports: list[DecayReport] = Field(default_factory=list)
    kernel_audits: list[KernelBoundAudit] = Field(default_factory=list)
    similarity_checks: list[SelfSimilarityCheck] = Field(default_factory=list)
    reference_checks: list[ReferenceCheck] = Field(default_factory=list)
    contraction_checks: list[ContractionCheck] = Field(default_factory=list)
    passed: bool = True

    @classmethod
    def assemble(
        cls,
        decay_reports: list[DecayReport] = (),
        kernel_audits: list[KernelBoundAudit] = (),
        similarity_checks: list[SelfSimilarityCheck] = (),
        reference_checks: list[ReferenceCheck] = (),
        contraction_checks: list[ContractionCheck] = (),
    ) -> "VerificationSuiteResult":
        members = [*decay_reports, *kernel_audits, *similarity_checks, *reference_checks, *contraction_checks]
        return cls(
            decay_reports=list(decay_reports),
            kernel_audits=list(kernel_audits),
            similarity_checks=list(similarity_checks),
            reference_checks=list(reference_checks),
            contraction_checks=list(contraction_checks),
            passed=all(member.passed for member in members),
        )

    def failed_checks(self) -> list[str]:
        names = [r.name for r in self.decay_reports if not r.passed]
        names += [f"{a.bound_id}(alpha={a.alpha})" for a in self.kernel_audits if not a.passed]
        names += [f"self-similarity(t={c.t})" for c in self.similarity_checks if not c.passed]
        names += [c.name for c in self.reference_checks if not c.passed]
        names += [c.name for c in self.contraction_checks if not c.passed]
        return names
