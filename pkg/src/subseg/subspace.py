"""Solving subword vectors inside an existing skip-gram embedding space.

A trained skip-gram model ties its input vectors E and output matrix W
together through softmax(E W) ~ the row-normalized co-occurrence table.
That relation extends to any group of words: given a binary incidence
matrix A mapping subwords to the words that contain them, the pooled
co-occurrence rows A C yield targets T = log of the smoothed, normalized
pooled rows, and subword input vectors are recovered by a ridge-regularized
right inverse

    E_sub = T W^T (W W^T + ridge I)^{-1}

computed here as a least-squares solve against the stored per-word output
rows.  The solve shares one QR factorization across all subword rows and
streams the pooled rows in batches, so memory stays O(batch * |V|).

Embedding files are plain text: a ``<row_count> <dim>`` header, then one
``token v1 ... v<dim>`` row per vector.  Values use repr-style decimal
formatting and survive a save/load round trip bit for bit.
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Sequence
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.linalg import solve_triangular

from subseg.errors import ArgumentError, NumericalError, ParseError, ValidationError
from subseg.cooccur import CooccurrenceCounts
from subseg.textio import SegmentedLexicon, atomic_text_writer, read_corpus

_DEFAULT_BATCH_ROWS = 1024


class EmbeddingTable:
    """Immutable dense token-to-vector table with float64 rows."""

    __slots__ = ("_tokens", "_vectors", "_index")

    def __init__(self, tokens: Sequence[str], vectors: np.ndarray):
        tokens = tuple(tokens)
        vectors = np.array(vectors, dtype=np.float64, copy=True)
        if vectors.ndim != 2:
            raise ValidationError(f"vectors must be 2-dimensional, got shape {vectors.shape}")
        if vectors.shape[0] != len(tokens):
            raise ValidationError(
                f"{len(tokens)} tokens but {vectors.shape[0]} vector rows"
            )
        if vectors.shape[1] < 1:
            raise ValidationError("embedding dimension must be positive")
        if not np.all(np.isfinite(vectors)):
            bad = int(np.argwhere(~np.isfinite(vectors).all(axis=1))[0][0])
            raise ValidationError(f"non-finite vector for token {tokens[bad]!r}")
        index: dict[str, int] = {}
        for position, token in enumerate(tokens):
            if not token or any(ch.isspace() for ch in token):
                raise ValidationError(f"invalid embedding token {token!r}")
            if token in index:
                raise ValidationError(f"duplicate embedding token {token!r}")
            index[token] = position
        vectors.setflags(write=False)
        self._tokens = tokens
        self._vectors = vectors
        self._index = index

    @property
    def tokens(self) -> tuple[str, ...]:
        return self._tokens

    @property
    def vectors(self) -> np.ndarray:
        return self._vectors

    @property
    def dim(self) -> int:
        return int(self._vectors.shape[1])

    def token_id(self, token: str) -> int:
        return self._index[token]

    def vector(self, token: str) -> np.ndarray:
        return self._vectors[self._index[token]]

    def row(self, position: int) -> np.ndarray:
        return self._vectors[position]

    def __contains__(self, token: object) -> bool:
        return token in self._index

    def __len__(self) -> int:
        return len(self._tokens)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingTable):
            return NotImplemented
        return self._tokens == other._tokens and np.array_equal(self._vectors, other._vectors)

    def __repr__(self) -> str:
        return f"EmbeddingTable({len(self)} tokens, dim={self.dim})"


def save_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    with atomic_text_writer(path) as handle:
        handle.write(f"{len(table)} {table.dim}\n")
        for token, row in zip(table.tokens, table.vectors):
            values = " ".join(repr(float(v)) for v in row)
            handle.write(f"{token} {values}\n")


def load_embeddings(path: str | Path) -> EmbeddingTable:
    lines = read_corpus(path)
    try:
        header = next(lines)
    except StopIteration:
        raise ParseError("empty embedding file, missing header", 1) from None
    fields = header.split()
    if len(fields) != 2:
        raise ParseError(f"expected '<row_count> <dim>' header, got {header!r}", 1)
    try:
        row_count, dim = int(fields[0]), int(fields[1])
    except ValueError:
        raise ParseError(f"non-integer header field in {header!r}", 1) from None
    if dim < 1:
        raise ParseError(f"dimension must be positive, got {dim}", 1)
    tokens: list[str] = []
    vectors = np.empty((row_count, dim), dtype=np.float64)
    filled = 0
    for lineno, line in enumerate(lines, 2):
        fields = line.split(" ")
        if len(fields) != dim + 1:
            raise ParseError(
                f"expected token plus {dim} values, got {len(fields) - 1}", lineno
            )
        if filled >= row_count:
            raise ParseError(f"more than the declared {row_count} rows", lineno)
        try:
            vectors[filled] = [float(v) for v in fields[1:]]
        except ValueError:
            raise ParseError("non-numeric vector component", lineno) from None
        tokens.append(fields[0])
        filled += 1
    if filled != row_count:
        raise ValidationError(f"{path}: declared {row_count} rows but found {filled}")
    return EmbeddingTable(tokens, vectors)


def align_embeddings(table: EmbeddingTable, tokens: Sequence[str]) -> EmbeddingTable:
    """Reorder rows to follow ``tokens``; every requested token must exist."""
    missing = [token for token in tokens if token not in table]
    if missing:
        shown = ", ".join(repr(t) for t in missing[:10])
        more = "" if len(missing) <= 10 else f" (+{len(missing) - 10} more)"
        raise ValidationError(f"embedding table is missing tokens: {shown}{more}")
    order = [table.token_id(token) for token in tokens]
    return EmbeddingTable(tokens, table.vectors[order])


class SubwordVocabulary:
    """Ordered subword-to-id table with dense contiguous ids."""

    __slots__ = ("_tokens", "_index")

    def __init__(self, tokens: Sequence[str]):
        tokens = tuple(tokens)
        index: dict[str, int] = {}
        for position, token in enumerate(tokens):
            if not token or any(ch.isspace() for ch in token):
                raise ValidationError(f"invalid subword {token!r}")
            if token in index:
                raise ValidationError(f"duplicate subword {token!r}")
            index[token] = position
        self._tokens = tokens
        self._index = index

    @property
    def tokens(self) -> tuple[str, ...]:
        return self._tokens

    def token_id(self, token: str) -> int:
        return self._index[token]

    def __contains__(self, token: object) -> bool:
        return token in self._index

    def __iter__(self) -> Iterator[str]:
        return iter(self._tokens)

    def __len__(self) -> int:
        return len(self._tokens)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubwordVocabulary):
            return NotImplemented
        return self._tokens == other._tokens

    def __repr__(self) -> str:
        return f"SubwordVocabulary({len(self)} subwords)"


class SegmentationMatrix:
    """Binary subword-by-word incidence, stored as sorted word ids per row.

    Rows are never empty: a subword with no incident word carries no
    information and is pruned before construction.
    """

    __slots__ = ("_word_count", "_rows")

    def __init__(self, word_count: int, rows: Sequence[Sequence[int]]):
        if word_count < 0:
            raise ArgumentError(f"word_count must be nonnegative, got {word_count}")
        cleaned: list[tuple[int, ...]] = []
        for row_id, row in enumerate(rows):
            ids = tuple(row)
            if not ids:
                raise ValidationError(f"subword row {row_id} is empty")
            if list(ids) != sorted(set(ids)):
                raise ValidationError(f"subword row {row_id} is not sorted and unique")
            if ids[0] < 0 or ids[-1] >= word_count:
                raise ValidationError(f"subword row {row_id} references an out-of-range word id")
            cleaned.append(ids)
        self._word_count = word_count
        self._rows = tuple(cleaned)

    @property
    def word_count(self) -> int:
        return self._word_count

    @property
    def row_count(self) -> int:
        return len(self._rows)

    @property
    def rows(self) -> tuple[tuple[int, ...], ...]:
        return self._rows

    def row(self, subword_id: int) -> tuple[int, ...]:
        return self._rows[subword_id]

    def to_csr(self) -> sparse.csr_matrix:
        indptr = [0]
        indices: list[int] = []
        for row in self._rows:
            indices.extend(row)
            indptr.append(len(indices))
        data = np.ones(len(indices), dtype=np.float64)
        return sparse.csr_matrix(
            (data, indices, indptr), shape=(len(self._rows), self._word_count)
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SegmentationMatrix):
            return NotImplemented
        return self._word_count == other._word_count and self._rows == other._rows

    def __repr__(self) -> str:
        return f"SegmentationMatrix({self.row_count} subwords x {self._word_count} words)"


def build_segmentation_matrix(
    word_tokens: Sequence[str],
    lexicon: SegmentedLexicon | None = None,
    max_substring_len: int | None = None,
    augment_chars: bool = True,
) -> tuple[SubwordVocabulary, SegmentationMatrix]:
    """Build the subword-to-word incidence in one of two modes.

    Lexicon mode (``lexicon`` given): a subword is incident to the words
    whose stored segmentation uses it.  With ``augment_chars`` every single
    character of every word is added as a subword incident to all words
    containing it, which guarantees that each word admits at least one
    complete segmentation path.

    Enumeration mode (``max_substring_len`` given): every substring of
    every word up to the given length is a subword.

    Subword ids are assigned lexicographically in both modes.
    """
    if (lexicon is None) == (max_substring_len is None):
        raise ArgumentError("exactly one of lexicon and max_substring_len must be given")
    index = {word: position for position, word in enumerate(word_tokens)}
    if len(index) != len(word_tokens):
        raise ValidationError("word tokens contain duplicates")
    incidence: dict[str, set[int]] = {}
    if lexicon is not None:
        for word, parts in lexicon.items():
            word_id = index.get(word)
            if word_id is None:
                raise ValidationError(f"lexicon word {word!r} is not in the vocabulary")
            for part in parts:
                incidence.setdefault(part, set()).add(word_id)
        if augment_chars:
            for word, word_id in index.items():
                for ch in set(word):
                    incidence.setdefault(ch, set()).add(word_id)
    else:
        if max_substring_len < 1:
            raise ArgumentError(f"max_substring_len must be at least 1, got {max_substring_len}")
        for word, word_id in index.items():
            n = len(word)
            for start in range(n):
                for stop in range(start + 1, min(start + max_substring_len, n) + 1):
                    incidence.setdefault(word[start:stop], set()).add(word_id)
    subwords = SubwordVocabulary(sorted(incidence))
    rows = [sorted(incidence[token]) for token in subwords.tokens]
    return subwords, SegmentationMatrix(len(word_tokens), rows)


def _log_target_block(
    pooled: np.ndarray, smoothing: float, vocab_size: int, row_offset: int
) -> np.ndarray:
    if smoothing == 0.0:
        zero_rows, zero_cols = np.nonzero(pooled <= 0.0)
        if zero_rows.size:
            s, y = int(zero_rows[0]) + row_offset, int(zero_cols[0])
            raise NumericalError(
                f"pooled count for subword row {s} and word column {y} is zero; "
                "log target is undefined with smoothing 0"
            )
    denominators = pooled.sum(axis=1) + smoothing * vocab_size
    return np.log((pooled + smoothing) / denominators[:, None])


def smoothed_log_target(
    matrix: SegmentationMatrix,
    counts: CooccurrenceCounts,
    smoothing: float = 0.1,
) -> np.ndarray:
    """Dense log targets: pooled co-occurrence rows, smoothed and normalized.

    Row s is log((AC[s, .] + smoothing) / (sum_y AC[s, y] + smoothing |V|)),
    so exp of every row sums to one.
    """
    if smoothing < 0:
        raise ArgumentError(f"smoothing must be nonnegative, got {smoothing}")
    if matrix.word_count != counts.vocab_size:
        raise ValidationError(
            f"matrix covers {matrix.word_count} words but counts cover {counts.vocab_size}"
        )
    pooled = (matrix.to_csr() @ counts.matrix()).toarray()
    return _log_target_block(pooled, smoothing, counts.vocab_size, 0)


def default_ridge(output_rows: EmbeddingTable) -> float:
    """Scale-aware ridge: 1e-6 * trace(W W^T) / dim."""
    rows = output_rows.vectors
    return 1e-6 * float(np.sum(rows * rows)) / output_rows.dim


class _RidgeFactor:
    """Shared QR factorization for the ridge least-squares right inverse.

    Rows are solved one at a time with matrix-vector products, so results
    are bitwise independent of how callers batch the target rows.
    """

    def __init__(self, output_vectors: np.ndarray, ridge: float):
        n_rows, dim = output_vectors.shape
        if ridge < 0:
            raise ArgumentError(f"ridge must be nonnegative, got {ridge}")
        if ridge == 0.0:
            if np.linalg.matrix_rank(output_vectors) < dim:
                raise NumericalError(
                    "output matrix is rank-deficient with ridge 0; "
                    "pass a positive ridge to regularize the solve"
                )
            q, r = np.linalg.qr(output_vectors)
        else:
            augmented = np.vstack(
                [output_vectors, math.sqrt(ridge) * np.eye(dim, dtype=np.float64)]
            )
            q, r = np.linalg.qr(augmented)
            q = q[:n_rows]
        self._q = q
        self._r = r
        self.dim = dim

    def solve_rows(self, targets: np.ndarray) -> np.ndarray:
        out = np.empty((targets.shape[0], self.dim), dtype=np.float64)
        for position, row in enumerate(targets):
            projected = self._q.T @ row
            out[position] = solve_triangular(self._r, projected, lower=False)
        return out


def right_inverse_solve(
    targets: np.ndarray,
    output_rows: EmbeddingTable,
    ridge: float = 0.0,
) -> np.ndarray:
    """Solve rows X minimizing ||X W - T||_F^2 + ridge ||X||_F^2.

    ``output_rows`` stores W transposed, one per-word output vector per row;
    ``targets`` has one row per solved vector and |V| columns.  The result
    equals T W^T (W W^T + ridge I)^{-1}, computed through a QR-based
    least-squares solve rather than explicit normal equations.  A
    rank-deficient W with ridge 0 raises, suggesting a positive ridge.
    """
    targets = np.asarray(targets, dtype=np.float64)
    if targets.ndim != 2:
        raise ArgumentError(f"targets must be 2-dimensional, got shape {targets.shape}")
    if targets.shape[1] != len(output_rows):
        raise ArgumentError(
            f"targets have {targets.shape[1]} columns but the output matrix covers "
            f"{len(output_rows)} words"
        )
    if output_rows.dim > len(output_rows):
        raise ArgumentError(
            f"embedding dimension {output_rows.dim} exceeds vocabulary size {len(output_rows)}"
        )
    if not np.all(np.isfinite(targets)):
        raise ValidationError("targets contain non-finite values")
    factor = _RidgeFactor(output_rows.vectors, ridge)
    return factor.solve_rows(targets)


def compute_subword_embeddings(
    subwords: SubwordVocabulary,
    matrix: SegmentationMatrix,
    counts: CooccurrenceCounts,
    output_rows: EmbeddingTable,
    smoothing: float = 0.1,
    ridge: float | None = None,
    batch_rows: int = _DEFAULT_BATCH_ROWS,
) -> EmbeddingTable:
    """Pool, smooth, and solve: subword vectors in the word embedding space.

    Composition of the smoothed log target with the right-inverse solve,
    streamed over batches of subword rows against one shared factorization.
    ``ridge=None`` selects the scale-aware default.
    """
    if len(subwords) != matrix.row_count:
        raise ValidationError(
            f"{len(subwords)} subwords but the incidence matrix has {matrix.row_count} rows"
        )
    if matrix.word_count != counts.vocab_size or counts.vocab_size != len(output_rows):
        raise ValidationError(
            "word coverage mismatch: matrix "
            f"{matrix.word_count}, counts {counts.vocab_size}, output rows {len(output_rows)}"
        )
    if smoothing < 0:
        raise ArgumentError(f"smoothing must be nonnegative, got {smoothing}")
    if batch_rows < 1:
        raise ArgumentError(f"batch_rows must be positive, got {batch_rows}")
    if ridge is None:
        ridge = default_ridge(output_rows)
    factor = _RidgeFactor(output_rows.vectors, ridge)
    pooled_all = matrix.to_csr() @ counts.matrix()
    vectors = np.empty((matrix.row_count, output_rows.dim), dtype=np.float64)
    for start in range(0, matrix.row_count, batch_rows):
        stop = min(start + batch_rows, matrix.row_count)
        pooled = pooled_all[start:stop].toarray()
        block = _log_target_block(pooled, smoothing, counts.vocab_size, start)
        vectors[start:stop] = factor.solve_rows(block)
    if not np.all(np.isfinite(vectors)):
        raise NumericalError("subword solve produced non-finite vectors")
    return EmbeddingTable(subwords.tokens, vectors)
