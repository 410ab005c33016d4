from gdlkit.graphs.graph import Graph, Orientation, permute
from gdlkit.graphs.matrices import (
    adjacency,
    connected_components,
    degree_matrix,
    diffusive_laplacian,
    generalized_laplacian,
    incidence,
    laplacian,
    laplacian_spectrum,
)
from gdlkit.graphs.heat import heat_flow, heat_step
from gdlkit.graphs.graph_io import read_edge_list, read_labels, write_edge_list
