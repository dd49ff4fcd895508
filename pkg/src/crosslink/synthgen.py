"""Synthetic aligned-network generator with ground-truth alignment.

Network A is grown by preferential attachment (power-law-ish degree
tail, min degree >= 1) and every user gets three synthetic attributes:
a name-like string, an affiliation phrase assembled from word pools,
and a document sampled from one of several planted topics. Network B
is a noisy copy: edges dropped, attribute fields blanked, name
characters mutated, words swapped. The true alignment is the identity
over user positions.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from crosslink.corpus import MatchedPairs, Network, UserRecord, save_network, save_pairs

NAME_SYLLABLES = [
    "an", "bar", "cal", "dor", "el", "fin", "gar", "hal", "ira", "jo",
    "kel", "lor", "mar", "nor", "ol", "per", "quin", "ros", "sal", "tor",
    "ul", "ver", "wil", "xan", "yor", "zel",
]

PLACES = [
    "arden", "bexley", "corville", "dunmore", "eastfield", "fernwood",
    "garnet", "halbrook", "iverton", "juniper", "kendale", "larkspur",
    "meridian", "northgate", "oakhaven", "pinecrest", "quarry", "redwood",
    "silverton", "thornbury", "umber", "vantage", "westmere", "yarrow",
    "ashford", "brimley", "calder", "dovermont", "elsinore", "foxglove",
    "glennard", "harrowgate", "ironwood", "jessamine", "kirkwall",
    "lindenhurst", "mayfield", "norwich", "ottermere", "pembrook",
    "quillford", "rosemont", "stonebridge", "tamarind", "underhill",
    "valemont", "whitmore", "yewbank",
]

FIELDS = [
    "computing", "mathematics", "physics", "chemistry", "biology",
    "economics", "linguistics", "sociology", "engineering", "statistics",
    "geography", "philosophy", "astronomy", "botany", "cartography",
    "demography", "ecology", "forestry", "genetics", "hydrology",
    "immunology", "journalism", "kinesiology", "logic",
]

KINDS = [
    "university", "institute", "college", "academy", "laboratory",
    "polytechnic", "conservatory", "observatory", "faculty", "bureau",
    "society", "foundation",
]

INTERESTS = [
    "hiking", "sailing", "carving", "baking", "painting", "climbing",
    "rowing", "weaving", "foraging", "sketching", "fencing", "brewing",
    "printmaking", "gardening", "skating", "birdwatching", "quilting",
    "archiving", "tinkering", "roaming", "chess", "origami", "pottery",
    "astronomy", "calligraphy", "juggling", "kayaking", "bouldering",
    "cycling", "archery", "falconry", "beekeeping", "woodwork",
    "metalwork", "glasswork", "leathercraft", "bookbinding", "mosaics",
    "embroidery", "knitting", "crochet", "macrame", "whittling",
    "lockpicking", "geocaching", "stargazing", "spelunking", "surfing",
    "snorkeling", "diving", "windsurfing", "paragliding", "slacklining",
    "parkour", "aikido", "capoeira", "taxidermy", "philately",
    "numismatics", "cartomancy", "topiary", "bonsai", "ikebana",
    "terrariums", "aquascaping", "vermiculture", "mycology", "herbalism",
    "distilling", "cheesemaking", "fermenting", "pickling", "smoking",
    "curing", "foundry", "smithing", "coopering", "thatching", "masonry",
    "plastering", "glazing", "turnery", "marquetry", "gilding",
    "engraving", "etching", "lithography", "serigraphy", "weightlifting",
    "orienteering", "canyoneering", "rafting", "mushing", "curling",
    "biathlon", "fowling", "angling", "crabbing", "clamming", "puzzling",
]

WORD_POOL = sorted(
    set(PLACES) | set(FIELDS) | set(KINDS) | set(INTERESTS) | {"department"}
)


@dataclass
class SynthConfig:
    n_users: int = 500
    attachment_m: int = 2
    edge_drop_p: float = 0.1
    attr_drop_p: float = 0.2
    char_noise_p: float = 0.05
    word_swap_p: float = 0.1
    n_planted_topics: int = 10
    topic_concentration: float = 0.3
    doc_length: int = 80
    seed: int = 0

    def __post_init__(self):
        for name in ("edge_drop_p", "attr_drop_p", "char_noise_p", "word_swap_p"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        if self.n_users < self.attachment_m + 1:
            raise ValueError(
                f"n_users must be >= attachment_m + 1 "
                f"({self.n_users} < {self.attachment_m + 1})"
            )
        if self.attachment_m < 1:
            raise ValueError("attachment_m must be >= 1")
        if self.n_planted_topics < 2:
            raise ValueError("need at least 2 planted topics")


def preferential_attachment_edges(
    n: int, m: int, rng: np.random.Generator
) -> set:
    """Grow a graph where new nodes attach to m degree-weighted targets.

    Uses the repeated-endpoints trick: sampling uniformly from the list
    of all edge endpoints is sampling proportionally to degree. Seed
    nodes 0..m form a star so every node ends with degree >= 1.
    """
    edges: set = set()
    endpoints: list = []

    def add(i, j):
        edges.add((min(i, j), max(i, j)))
        endpoints.extend((i, j))

    for j in range(1, m + 1):
        add(0, j)
    for new in range(m + 1, n):
        targets: set = set()
        while len(targets) < m:
            pick = endpoints[int(rng.integers(0, len(endpoints)))]
            targets.add(int(pick))
        for t in targets:
            add(new, t)
    return edges


def _make_name(rng: np.random.Generator) -> str:
    def part(n_syll):
        return "".join(
            NAME_SYLLABLES[int(rng.integers(0, len(NAME_SYLLABLES)))]
            for _ in range(n_syll)
        ).capitalize()

    name = f"{part(int(rng.integers(2, 4)))} {part(int(rng.integers(2, 4)))}"
    if rng.random() < 0.3:
        name += "".join(str(int(rng.integers(0, 10))) for _ in range(int(rng.integers(1, 4))))
    return name


def _make_affiliation(rng: np.random.Generator, n_interests: int = 3) -> str:
    """Affiliation phrase plus a few interest words.

    The interest combination is close to unique per user, which makes
    the word level discriminative rather than merely cluster-level.
    """
    place = PLACES[int(rng.integers(0, len(PLACES)))]
    field = FIELDS[int(rng.integers(0, len(FIELDS)))]
    kind = KINDS[int(rng.integers(0, len(KINDS)))]
    patterns = [
        f"{kind} of {place}",
        f"{place} {kind} of {field}",
        f"department of {field} {place} {kind}",
        f"{field} {kind} of {place}",
    ]
    affiliation = patterns[int(rng.integers(0, len(patterns)))]
    picks = rng.choice(len(INTERESTS), size=n_interests, replace=False)
    interests = " ".join(INTERESTS[int(i)] for i in sorted(picks))
    return f"{affiliation} {interests}"


def _topic_pools(n_topics: int, words_per_topic: int = 30) -> list:
    """Disjoint per-topic vocabularies built from syllable pairs.

    The topic suffix keeps pools disjoint; the (k mod S, k // S) index
    pair keeps words unique within a pool.
    """
    pools = []
    syll = NAME_SYLLABLES
    for t in range(n_topics):
        pool = []
        for k in range(words_per_topic):
            a = syll[k % len(syll)]
            b = syll[(t * 3 + k // len(syll)) % len(syll)]
            pool.append(f"{a}{b}{t}")
        pools.append(pool)
    return pools


def _make_document(
    rng: np.random.Generator, pools: list, mixture: np.ndarray, length: int
) -> str:
    """Sample a document from a per-user topic mixture.

    The mixture acts as a continuous user fingerprint: matched users
    share it, unmatched users rarely do.
    """
    cum = np.cumsum(mixture)
    words = []
    for _ in range(length):
        topic = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        topic = min(topic, len(pools) - 1)
        pool = pools[topic]
        words.append(pool[int(rng.integers(0, len(pool)))])
    return " ".join(words)


def _mutate_chars(text: str, p: float, rng: np.random.Generator) -> str:
    if p == 0.0:
        return text
    out = []
    for c in text:
        if not c.isspace() and rng.random() < p:
            out.append(string.ascii_lowercase[int(rng.integers(0, 26))])
        else:
            out.append(c)
    return "".join(out)


def _swap_words(text: str, p: float, pool: list, rng: np.random.Generator) -> str:
    if p == 0.0 or not text:
        return text
    words = text.split()
    for i in range(len(words)):
        if rng.random() < p:
            words[i] = pool[int(rng.integers(0, len(pool)))]
    return " ".join(words)


def generate_pair(cfg: SynthConfig):
    """Generate (network A, noisy network B, true alignment).

    Deterministic given the config. The alignment is a bijection mapping
    position i in A to position i in B.
    """
    rng = np.random.default_rng(cfg.seed)
    pools = _topic_pools(cfg.n_planted_topics)

    edges_a = preferential_attachment_edges(cfg.n_users, cfg.attachment_m, rng)
    users_a = []
    for i in range(cfg.n_users):
        mixture = rng.dirichlet(
            np.full(cfg.n_planted_topics, cfg.topic_concentration)
        )
        users_a.append(
            UserRecord(
                id=f"xu{i:05d}",
                char_attr=_make_name(rng),
                word_attr=_make_affiliation(rng),
                topic_attr=_make_document(rng, pools, mixture, cfg.doc_length),
            )
        )
    net_a = Network(users=users_a, edges=edges_a, name="synth-A")

    topic_word_pool = sorted({w for pool in pools for w in pool})
    users_b = []
    for i, ua in enumerate(users_a):
        char_attr = ua.char_attr
        word_attr = ua.word_attr
        topic_attr = ua.topic_attr
        if rng.random() < cfg.attr_drop_p:
            char_attr = ""
        if rng.random() < cfg.attr_drop_p:
            word_attr = ""
        if rng.random() < cfg.attr_drop_p:
            topic_attr = ""
        char_attr = _mutate_chars(char_attr, cfg.char_noise_p, rng)
        word_attr = _swap_words(word_attr, cfg.word_swap_p, WORD_POOL, rng)
        topic_attr = _swap_words(topic_attr, cfg.word_swap_p, topic_word_pool, rng)
        users_b.append(
            UserRecord(
                id=f"yu{i:05d}",
                char_attr=char_attr,
                word_attr=word_attr,
                topic_attr=topic_attr,
            )
        )
    edges_b = {e for e in edges_a if rng.random() >= cfg.edge_drop_p}
    net_b = Network(users=users_b, edges=edges_b, name="synth-B")

    truth = MatchedPairs([(i, i) for i in range(cfg.n_users)])
    return net_a, net_b, truth


def write_dataset(cfg: SynthConfig, out_dir) -> dict:
    """Generate a pair and write the standard corpus files.

    Returns the path map: users_x, edges_x, users_y, edges_y, pairs.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    net_a, net_b, truth = generate_pair(cfg)
    paths = {
        "users_x": out / "users_x.tsv",
        "edges_x": out / "edges_x.tsv",
        "users_y": out / "users_y.tsv",
        "edges_y": out / "edges_y.tsv",
        "pairs": out / "pairs.tsv",
    }
    save_network(net_a, paths["users_x"], paths["edges_x"])
    save_network(net_b, paths["users_y"], paths["edges_y"])
    save_pairs(truth, paths["pairs"], net_a, net_b)
    return {k: str(v) for k, v in paths.items()}
