"""Attributed-network data model, file ingestion, and text preprocessing.

A network is a set of users with undirected edges and three text
attributes per user: a short username-like string (character level),
a phrase (word level), and a long document (topic level).

File formats:
  users file  - UTF-8, one record per line, four tab-separated fields:
                id, char_attr, word_attr, topic_attr (fields may be empty).
  edges file  - one edge per line, two whitespace-separated ids.
  pairs file  - one matched pair per line, "idX<TAB>idY".
"""

from __future__ import annotations

import logging
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from crosslink.errors import DataError

logger = logging.getLogger(__name__)

# Token sequences are plain lists of strings, order preserved.
TokenStream = list

# Minimal English stop-word list; replaceable through PreprocessConfig.
DEFAULT_STOPWORDS = frozenset(
    "a an and are as at be by for from has he in is it its of on or "
    "that the to was were will with".split()
)

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass
class UserRecord:
    """One user with an external id and three attribute texts."""

    id: str
    char_attr: str = ""
    word_attr: str = ""
    topic_attr: str = ""


@dataclass
class Network:
    """Users plus undirected edges over dense indices 0..n-1.

    Edges are stored as (i, j) tuples with i < j; no self-loops, no
    duplicates. Instances are treated as immutable after construction.
    """

    users: list[UserRecord]
    edges: set[tuple[int, int]]
    name: str = ""
    _adjacency: list[list[int]] | None = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self):
        n = len(self.users)
        for i, j in self.edges:
            if not (0 <= i < n and 0 <= j < n):
                raise DataError(f"edge ({i},{j}) references a user index out of range")
            if i == j:
                raise DataError(f"self-loop ({i},{i}) not allowed in Network")
            if i > j:
                raise DataError(f"edge ({i},{j}) not normalized to i < j")

    @property
    def n_users(self) -> int:
        return len(self.users)

    def adjacency(self) -> list[list[int]]:
        """Neighbor index lists, computed once and cached."""
        if self._adjacency is None:
            adj: list[list[int]] = [[] for _ in range(self.n_users)]
            for i, j in sorted(self.edges):
                adj[i].append(j)
                adj[j].append(i)
            self._adjacency = adj
        return self._adjacency

    def degrees(self) -> list[int]:
        return [len(nbrs) for nbrs in self.adjacency()]

    def id_to_index(self) -> dict[str, int]:
        return {u.id: i for i, u in enumerate(self.users)}


@dataclass
class MatchedPairs:
    """Cross-network index pairs: (index into X users, index into Y users)."""

    pairs: list[tuple[int, int]]

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def validate_one_to_one(self) -> None:
        """Raise DataError if any index repeats on either side.

        Ground-truth anchor sets must be one-to-one; predicted pairs from
        per-query nearest neighbor need not be, so this check is opt-in.
        """
        left = [i for i, _ in self.pairs]
        right = [j for _, j in self.pairs]
        if len(set(left)) != len(left):
            raise DataError("matched pairs repeat an index on the X side")
        if len(set(right)) != len(right):
            raise DataError("matched pairs repeat an index on the Y side")


def normalize_edge(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


def load_network(users_path, edges_path, name: str = "") -> Network:
    """Load a Network from a users file and an edges file.

    User indices follow file order. Duplicate and reversed edges are
    deduplicated; self-loops are dropped with a logged warning count.

    Raises DataError on malformed lines (with line number) or on edges
    referencing unknown ids.
    """
    users: list[UserRecord] = []
    seen_ids: set[str] = set()
    with open(users_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise DataError(
                    f"{users_path}:{lineno}: expected 4 tab-separated fields, "
                    f"got {len(fields)}"
                )
            uid = fields[0]
            if not uid:
                raise DataError(f"{users_path}:{lineno}: empty user id")
            if uid in seen_ids:
                raise DataError(f"{users_path}:{lineno}: duplicate user id {uid!r}")
            seen_ids.add(uid)
            users.append(UserRecord(uid, fields[1], fields[2], fields[3]))

    index = {u.id: i for i, u in enumerate(users)}
    edges: set[tuple[int, int]] = set()
    self_loops = 0
    with open(edges_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise DataError(
                    f"{edges_path}:{lineno}: expected 2 ids, got {len(parts)}"
                )
            try:
                i, j = index[parts[0]], index[parts[1]]
            except KeyError as exc:
                raise DataError(
                    f"{edges_path}:{lineno}: unknown id {exc.args[0]!r}"
                ) from None
            if i == j:
                self_loops += 1
                continue
            edges.add(normalize_edge(i, j))

    if self_loops:
        logger.warning(
            "dropped %d self-loop(s) while loading %s", self_loops, edges_path
        )
    return Network(users=users, edges=edges, name=name or str(users_path))


def save_network(net: Network, users_path, edges_path) -> None:
    """Write a Network back out in the canonical file format."""
    with open(users_path, "w", encoding="utf-8") as fh:
        for u in net.users:
            for text in (u.char_attr, u.word_attr, u.topic_attr):
                if "\t" in text:
                    raise DataError(f"attribute of user {u.id!r} contains a tab")
            fh.write(f"{u.id}\t{u.char_attr}\t{u.word_attr}\t{u.topic_attr}\n")
    with open(edges_path, "w", encoding="utf-8") as fh:
        for i, j in sorted(net.edges):
            fh.write(f"{net.users[i].id} {net.users[j].id}\n")


def load_pairs(path, net_x: Network, net_y: Network) -> MatchedPairs:
    """Load a pairs file, resolving ids against the two networks."""
    ix, iy = net_x.id_to_index(), net_y.id_to_index()
    pairs: list[tuple[int, int]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 'idX<TAB>idY'")
            if parts[0] not in ix:
                raise DataError(f"{path}:{lineno}: unknown id {parts[0]!r}")
            if parts[1] not in iy:
                raise DataError(f"{path}:{lineno}: unknown id {parts[1]!r}")
            pairs.append((ix[parts[0]], iy[parts[1]]))
    return MatchedPairs(pairs)


def save_pairs(pairs: MatchedPairs, path, net_x: Network, net_y: Network) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, j in pairs:
            fh.write(f"{net_x.users[i].id}\t{net_y.users[j].id}\n")


@dataclass
class PreprocessConfig:
    """Text normalization options applied before tokenization."""

    stopwords: frozenset = DEFAULT_STOPWORDS
    strip_diacritics: bool = True
    stemmer: Callable[[str], str] | None = None  # pluggable, no-op by default


def preprocess_text(raw: str, cfg: PreprocessConfig | None = None) -> str:
    """Lowercase, strip diacritics, drop stop-words, apply optional stemmer.

    Empty input yields empty output. Rare-word removal is corpus-level;
    see remove_rare_words.
    """
    if cfg is None:
        cfg = PreprocessConfig()
    text = raw.lower()
    if cfg.strip_diacritics:
        text = "".join(
            c
            for c in unicodedata.normalize("NFKD", text)
            if not unicodedata.combining(c)
        )
    if cfg.stopwords or cfg.stemmer:
        words = text.split()
        words = [w for w in words if w not in cfg.stopwords]
        if cfg.stemmer is not None:
            words = [cfg.stemmer(w) for w in words]
        text = " ".join(words)
    return text


def remove_rare_words(
    texts: Sequence[str], min_count: int = 10
) -> list[str]:
    """Corpus-level pass dropping words that occur fewer than min_count times.

    Applied per attribute level per network. After the pass every surviving
    word has corpus frequency >= min_count.
    """
    counts: Counter = Counter()
    tokenized = [word_tokenize(t) for t in texts]
    for tokens in tokenized:
        counts.update(tokens)
    return [
        " ".join(w for w in tokens if counts[w] >= min_count)
        for tokens in tokenized
    ]


def char_tokenize(attr: str, q_values: Iterable[int] = (2, 3)) -> TokenStream:
    """Character-level tokens: every single character plus contiguous q-grams.

    Tokens are case-folded. Whitespace characters are not tokens and
    q-grams never span whitespace, so "a b" with q=2 yields no "a b" or
    "ab" bigram. An empty q set yields single characters only.
    """
    qs = sorted(set(q_values))
    for q in qs:
        if q < 2:
            raise ValueError(f"q-gram length must be >= 2, got {q}")
    tokens: TokenStream = []
    for chunk in attr.lower().split():
        tokens.extend(chunk)
        for q in qs:
            tokens.extend(chunk[k : k + q] for k in range(len(chunk) - q + 1))
    return tokens


def word_tokenize(attr: str) -> TokenStream:
    """Whitespace/punctuation-delimited word tokens, order preserved."""
    return _WORD_RE.findall(attr)
