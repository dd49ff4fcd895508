"""Regularized canonical correlation analysis over aligned training pairs.

Covariances use the population divisor T over aligned columns. Tikhonov
terms r^X I and r^Y I make the view covariances positive definite even
when the feature dimension exceeds the number of training pairs. The
generalized eigenproblem

    [0 C_xy; C_yx 0] [h; m] = rho [Chat_xx 0; 0 Chat_yy] [h; m]

is reduced to a standard symmetric eigenproblem on

    Chat_xx^{-1/2} C_xy Chat_yy^{-1} C_yx Chat_xx^{-1/2}

whose eigenvalues are the squared canonical correlations. Projections
are normalized to unit variance in the regularized metric
(h_i' Chat_xx h_i = m_i' Chat_yy m_i = 1) and signed so the first
nonzero entry of each h_i is positive.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field

import numpy as np

from crosslink.errors import DataError, NumericalError
from crosslink.features import FeatureMatrix

logger = logging.getLogger(__name__)

MAGIC = b"XCM1"

_RANK_TOL = 1e-12


@dataclass
class CovarianceSet:
    c_xx: np.ndarray
    c_yy: np.ndarray
    c_xy: np.ndarray

    @property
    def d_x(self) -> int:
        return self.c_xx.shape[0]

    @property
    def d_y(self) -> int:
        return self.c_yy.shape[0]


@dataclass
class CcaModel:
    """Canonical projection pair with training centering vectors."""

    h: np.ndarray  # d_x x k
    m: np.ndarray  # d_y x k
    correlations: np.ndarray  # k, descending
    reg_x: float
    reg_y: float
    train_means_x: np.ndarray = field(default=None)
    train_means_y: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.train_means_x is None:
            self.train_means_x = np.zeros(self.h.shape[0])
        if self.train_means_y is None:
            self.train_means_y = np.zeros(self.m.shape[0])

    @property
    def k(self) -> int:
        return self.h.shape[1]

    def save(self, path) -> None:
        header = json.dumps(
            {
                "d_x": int(self.h.shape[0]),
                "d_y": int(self.m.shape[0]),
                "k": int(self.k),
                "reg_x": self.reg_x,
                "reg_y": self.reg_y,
                "correlations": [float(c) for c in self.correlations],
            }
        ).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", len(header)))
            fh.write(header)
            for arr in (self.train_means_x, self.train_means_y, self.h, self.m):
                fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "CcaModel":
        with open(path, "rb") as fh:
            if fh.read(4) != MAGIC:
                raise DataError(f"{path}: not a projection-model file (bad magic)")
            (hlen,) = struct.unpack("<I", fh.read(4))
            hdr = json.loads(fh.read(hlen).decode("utf-8"))
            d_x, d_y, k = hdr["d_x"], hdr["d_y"], hdr["k"]

            def read(shape):
                count = int(np.prod(shape))
                raw = fh.read(count * 8)
                if len(raw) != count * 8:
                    raise DataError(f"{path}: truncated model payload")
                return np.frombuffer(raw, dtype="<f8").reshape(shape).copy()

            means_x = read((d_x,))
            means_y = read((d_y,))
            h = read((d_x, k))
            m = read((d_y, k))
        return cls(
            h=h,
            m=m,
            correlations=np.array(hdr["correlations"]),
            reg_x=hdr["reg_x"],
            reg_y=hdr["reg_y"],
            train_means_x=means_x,
            train_means_y=means_y,
        )


def center_columns(data: np.ndarray):
    """Subtract the column mean; returns (centered, means)."""
    means = data.mean(axis=1)
    return data - means[:, None], means


def covariances(x_centered: np.ndarray, y_centered: np.ndarray) -> CovarianceSet:
    """Population covariances (divisor T) of pre-centered aligned columns.

    Round-off asymmetry in the view covariances is removed by averaging
    with the transpose.
    """
    if x_centered.shape[1] != y_centered.shape[1]:
        raise ValueError(
            f"aligned column counts differ: {x_centered.shape[1]} vs "
            f"{y_centered.shape[1]}"
        )
    t = x_centered.shape[1]
    if t == 0:
        raise ValueError("covariances require at least one aligned column")
    c_xx = x_centered @ x_centered.T / t
    c_yy = y_centered @ y_centered.T / t
    c_xy = x_centered @ y_centered.T / t
    return CovarianceSet(
        c_xx=(c_xx + c_xx.T) / 2.0,
        c_yy=(c_yy + c_yy.T) / 2.0,
        c_xy=c_xy,
    )


def _inv_sqrt_psd(mat: np.ndarray, label: str) -> np.ndarray:
    evals, evecs = np.linalg.eigh(mat)
    if evals.min() <= 0:
        raise NumericalError(
            f"regularized covariance {label} is not positive definite "
            f"(min eigenvalue {evals.min():.3e}); increase the regularization"
        )
    return (evecs / np.sqrt(evals)) @ evecs.T


def solve_rcca(
    cov: CovarianceSet, k: int, reg_x: float, reg_y: float
) -> CcaModel:
    """Top-k canonical pairs of the regularized problem.

    Raises NumericalError (advising larger regularization) when a
    regularized covariance is not positive definite. If k exceeds the
    numerical rank of the correlation operator, k is truncated with a
    warning.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > min(cov.d_x, cov.d_y):
        raise ValueError(
            f"k={k} exceeds min feature dimension {min(cov.d_x, cov.d_y)}"
        )
    if reg_x < 0 or reg_y < 0:
        raise ValueError("regularization coefficients must be nonnegative")

    hat_xx = cov.c_xx + reg_x * np.eye(cov.d_x)
    hat_yy = cov.c_yy + reg_y * np.eye(cov.d_y)

    # Cholesky as the positive-definiteness gate.
    for mat, label in ((hat_xx, "of the X view"), (hat_yy, "of the Y view")):
        try:
            np.linalg.cholesky(mat)
        except np.linalg.LinAlgError:
            raise NumericalError(
                f"regularized covariance {label} is not positive definite; "
                "increase the regularization"
            ) from None

    inv_sqrt_xx = _inv_sqrt_psd(hat_xx, "of the X view")
    yy_inv_cyx = np.linalg.solve(hat_yy, cov.c_xy.T)

    core = inv_sqrt_xx @ cov.c_xy @ yy_inv_cyx @ inv_sqrt_xx
    core = (core + core.T) / 2.0
    evals, evecs = np.linalg.eigh(core)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]

    rank = int(np.sum(evals > _RANK_TOL * max(1.0, float(evals[0]))))
    if rank == 0:
        raise NumericalError("cross-covariance has numerical rank 0; no correlated directions")
    if k > rank:
        logger.warning("k=%d exceeds numerical rank %d; truncating", k, rank)
        k = rank

    rho = np.sqrt(np.clip(evals[:k], 0.0, None))
    h = inv_sqrt_xx @ evecs[:, :k]
    m = (yy_inv_cyx @ h) / rho[None, :]

    # Deterministic sign: first nonzero entry of each h column positive.
    for i in range(k):
        col = h[:, i]
        nz = np.nonzero(np.abs(col) > 1e-12)[0]
        if nz.size and col[nz[0]] < 0:
            h[:, i] = -h[:, i]
            m[:, i] = -m[:, i]

    return CcaModel(h=h, m=m, correlations=rho, reg_x=reg_x, reg_y=reg_y)


def fit_rcca(
    x_train: np.ndarray,
    y_train: np.ndarray,
    k: int,
    reg_x: float,
    reg_y: float,
) -> CcaModel:
    """Center training pairs, estimate covariances, and solve.

    The training-pair means are stored in the model and reused when
    projecting full networks.
    """
    xc, mx = center_columns(np.asarray(x_train, dtype=np.float64))
    yc, my = center_columns(np.asarray(y_train, dtype=np.float64))
    model = solve_rcca(covariances(xc, yc), k, reg_x, reg_y)
    model.train_means_x = mx
    model.train_means_y = my
    return model


def project(model: CcaModel, fm: FeatureMatrix, side: str) -> FeatureMatrix:
    """Center by the stored training means and project with H (or M)."""
    side = side.lower()
    if side not in ("x", "y"):
        raise ValueError(f"side must be 'x' or 'y', got {side!r}")
    basis = model.h if side == "x" else model.m
    means = model.train_means_x if side == "x" else model.train_means_y
    if fm.d != basis.shape[0]:
        raise ValueError(
            f"feature dimension {fm.d} does not match the model's "
            f"{side.upper()}-side dimension {basis.shape[0]}"
        )
    data = basis.T @ (fm.data - means[:, None])
    return FeatureMatrix(data=data, level="projected")
