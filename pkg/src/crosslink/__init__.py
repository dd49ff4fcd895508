"""Cross-network user identity linking.

Embeds two attributed networks at four feature levels (character, word,
topic, structure), fuses the levels, learns a pair of regularized-CCA
projections into a shared correlated space, and ranks cross-network
candidates by Euclidean distance.
"""

from crosslink.corpus import Network, UserRecord, MatchedPairs, load_network
from crosslink.features import FeatureMatrix

__version__ = "0.1.0"

__all__ = [
    "Network",
    "UserRecord",
    "MatchedPairs",
    "load_network",
    "FeatureMatrix",
]
