"""Contact Hamiltonian flows and Hamilton-Jacobi checks for thermodynamic transformations."""

from .geometry import (
    ContactChart,
    ContactHamiltonian,
    PhasePoint,
    TangentVector,
    contact_form_apply,
    contact_vector_field,
    reeb_defect,
    volume_form_coefficient,
)
from .submanifold import (
    LegendreGenerator,
    SectionSigma,
    geometric_hj_residual,
    legendre_embed,
    on_submanifold_residual,
    projected_field,
    restriction_residual,
    section_lift,
)
from .thermo import (
    GasState,
    IdealGasParams,
    InteractionParams,
    energy_fundamental,
    entropy_fundamental,
    euler_residual,
    gas_law_residuals,
    interacting_state,
    legendre_regularity,
    massieu_potential,
    transform_hamiltonian_representation,
)
from .dynamics import (
    AnalyticProcess,
    IntegratorConfig,
    PrincipalFunction,
    Trajectory,
    analytic_oracle,
    analytic_processes,
    hj_residual,
    integrate_characteristics,
    integrate_contact_flow,
    monitor_report,
)
from .generic_oc import (
    OCPotential,
    OCSystem,
    degeneracy_residual,
    oc3,
    oc_contact_hamiltonian,
    oc_geometric_hj_residual,
    oc_integrate,
    oc_vector_field,
)
from .scenario import RunReport, Scenario, emit_outputs, parse_scenario, run_scenario

__version__ = "0.1.0"

__all__ = [
    "ContactChart",
    "ContactHamiltonian",
    "PhasePoint",
    "TangentVector",
    "contact_form_apply",
    "contact_vector_field",
    "reeb_defect",
    "volume_form_coefficient",
    "LegendreGenerator",
    "SectionSigma",
    "geometric_hj_residual",
    "legendre_embed",
    "on_submanifold_residual",
    "projected_field",
    "restriction_residual",
    "section_lift",
    "GasState",
    "IdealGasParams",
    "InteractionParams",
    "energy_fundamental",
    "entropy_fundamental",
    "euler_residual",
    "gas_law_residuals",
    "interacting_state",
    "legendre_regularity",
    "massieu_potential",
    "transform_hamiltonian_representation",
    "AnalyticProcess",
    "IntegratorConfig",
    "PrincipalFunction",
    "Trajectory",
    "analytic_oracle",
    "analytic_processes",
    "hj_residual",
    "integrate_characteristics",
    "integrate_contact_flow",
    "monitor_report",
    "OCPotential",
    "OCSystem",
    "degeneracy_residual",
    "oc3",
    "oc_contact_hamiltonian",
    "oc_geometric_hj_residual",
    "oc_integrate",
    "oc_vector_field",
    "RunReport",
    "Scenario",
    "emit_outputs",
    "parse_scenario",
    "run_scenario",
]
