"""Community detection on geolocated networks with distance modularity."""

from .errors import (ConsistencyError, DegenerateCentroidError, DomainError, GeomodError,
                     NodeNotFoundError, ParseError, SizeLimitError, UndefinedScoreError)
from .geodesy import (DecayKernel, DistanceMatrix, GeoCoord, centroid, decay, distance_matrix,
                      haversine_km)
from .graph import GeoGraph, IngestReport, build_graph, load_checkins, load_edge_list, load_graph, save_graph
from .louvain import (DetectionConfig, DetectionResult, MetaGraph, aggregate, detect, louvain, louvain_d,
                      rescore_base)
from .modularity import (CommunityScore, NullModelTable, build_null_model, community_quality,
                         distance_modularity, gain, ng_modularity, p_hat, p_sym, rank_communities)
from .partition import Partition
from .sampling import SampleSpec, batch_samples, snowball_sample

__version__ = "0.1.0"
