"""SIS epidemics on kernels and graphons: R0, regimes, flows, equilibria and policies."""

from .dynamics import (
    EquilibriumReport,
    Regime,
    Trajectory,
    classify_regime,
    counterexample_equilibria,
    integrate,
    maximal_equilibrium,
    one_group_closed_form,
    vector_field,
)
from .lockdown import is_perfect_lockdown, partial_lockdown_check, r0_bounds
from .space_kernel import (
    ConstantGraphonSpec,
    CounterexampleChainSpec,
    DiscreteSpace,
    GeometricSpec,
    GraphonSpec,
    GraphSpec,
    KernelModel,
    MatrixSpec,
    SBMSpec,
    ValidationError,
    apply_T,
    build_kernel,
    degrees,
    is_connected,
    validate,
)
from .spectral import (
    eigen_threshold,
    gelfand_sequence,
    perron_vectors,
    r0,
    r0_effective,
    spectral_bound,
    spectral_radius,
)
from .vaccination import (
    Mechanism,
    VaccinationPolicy,
    VaccineSet,
    build_perfect_vaccine_model,
    build_vaccinated_model,
    r0_vaccinated,
    total_prevalence,
)

__version__ = "0.1.0"
