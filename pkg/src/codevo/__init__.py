"""Evolution of shared codes in structured populations of agents.

Exact information measures over small discrete networks, a CMA-ES
optimizer for agent codes, and tools to analyse the evolved populations.
"""

from .infotheory import (
    ConditionalTable,
    JointTable,
    Variable,
    conditional_mutual_information,
    entropy,
    jensen_shannon_divergence,
    kl_divergence,
    marginalize,
    mutual_information,
    product_and_normalize,
)
from .model import (
    GRID_TYPES,
    Agent,
    AgentType,
    Code,
    EnvironmentSpec,
    PopulationModel,
    PopulationStructure,
    SensorSpec,
    agent_env_info,
    agent_output_info,
    blind_info,
    build_joint,
    code_similarity,
    env_info_pair,
    environment_entropy,
    factored_sensor,
    grid_structure,
    own_sensor_info,
    side_information,
    similarity_bound,
    symmetric_sensor,
    type_sensor,
    well_mixed_structure,
)
from .optim import CmaEsConfig, OptimizationTrace, ParamCodec, cma_es_maximize, optimize_scenario
from .analysis import (
    classical_mds,
    code_distance,
    concept_table,
    connected_components,
    distance_matrix,
    group_codes,
    structure_graph,
)

__version__ = "0.1.0"
