"""
Word tokenization and the frozen word-embedding table.

The same table embeds query words and narrative sentences, so paragraph and
query features share one semantic space.
"""

import logging
import re

import numpy as np

from narrated_vmr.datamodel.types import Query
from narrated_vmr.exceptions import ValidationError

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[\w']+")


def tokenize(text: str) -> list[str]:
    """Lowercase word tokens of *text*."""
    return _TOKEN_RE.findall((text or "").lower())


class EmbeddingTable:
    """
    Frozen word vectors (GloVe text format).

    Out-of-vocabulary words map to the zero vector.
    """

    def __init__(self, words, vectors):
        vectors = np.asarray(vectors, dtype=np.float32)
        if vectors.ndim != 2 or vectors.shape[0] != len(words):
            raise ValidationError(f"{len(words)} words for embedding matrix of shape {vectors.shape}")
        self.index = {word: i for i, word in enumerate(words)}
        self.vectors = vectors
        self.vectors.setflags(write=False)
        self._zero = np.zeros(self.dim, dtype=np.float32)
        self._zero.setflags(write=False)

    @classmethod
    def from_text_file(cls, path, limit=None):
        """
        Load ``word v1 v2 ... vd`` lines.

        Args:
            path: embedding file
            limit: read at most this many words
        """
        words = []
        rows = []
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                parts = line.rstrip().split(" ")
                if len(parts) < 2:
                    continue
                words.append(parts[0])
                rows.append(np.asarray(parts[1:], dtype=np.float32))
                if limit and len(words) >= limit:
                    break
        if not rows:
            raise ValidationError(f"{path}: no embeddings found")
        dims = {row.shape[0] for row in rows}
        if len(dims) != 1:
            raise ValidationError(f"{path}: inconsistent embedding dimensions {sorted(dims)}")
        logger.info("Loaded %d word vectors of dim %d from %s", len(words), rows[0].shape[0], path)
        return cls(words, np.stack(rows))

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __contains__(self, word):
        return word in self.index

    def __len__(self):
        return len(self.index)

    def lookup(self, word: str) -> np.ndarray:
        i = self.index.get(word)
        return self._zero if i is None else self.vectors[i]

    def encode(self, tokens) -> np.ndarray:
        """Stack the vectors of *tokens* into ``[len(tokens), dim]``."""
        if not tokens:
            return np.zeros((0, self.dim), dtype=np.float32)
        return np.stack([self.lookup(token) for token in tokens])


def embed_sentence(text: str, embedding_table: EmbeddingTable) -> np.ndarray:
    """
    Mean of the word vectors of *text*.

    OOV words contribute the zero vector but still count in the denominator.

    Raises:
        ValidationError: if *text* has no tokens
    """
    tokens = tokenize(text)
    if not tokens:
        raise ValidationError(f"sentence has no tokens: {text!r}")
    return embedding_table.encode(tokens).mean(axis=0)


def build_query(query_id: str, text: str, embedding_table: EmbeddingTable) -> Query:
    """Tokenize and embed a query sentence."""
    tokens = tokenize(text)
    if not tokens:
        raise ValidationError(f"query '{query_id}' has no tokens: {text!r}")
    return Query(
        query_id=query_id,
        tokens=tokens,
        embeddings=embedding_table.encode(tokens),
        mask=np.ones(len(tokens), dtype=bool),
    )
