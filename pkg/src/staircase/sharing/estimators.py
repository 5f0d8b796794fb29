"""scikit-learn style front ends for the two codecs.

>>> code = StaircaseSharing(n=3, k=2, z=1, random_state=0).fit(A)
>>> shares = code.transform(A)
>>> code.inverse_transform(shares[:2])
"""
from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_field_matrix, check_generator
from ..errors import UsageError
from ..field import FieldContext
from ..params import SystemParams
from .classical import classical_decode, classical_encode
from .layout import classical_layout, staircase_layout
from .staircase import decode_shares, staircase_decode, staircase_encode


class _SharingCode(TransformerMixin, BaseEstimator):

    def __init__(self, n=3, k=2, z=1, modulus=65537, random_state=None):
        self.n = n
        self.k = k
        self.z = z
        self.modulus = modulus
        self.random_state = random_state

    def fit(self, X, y=None):
        self.params_ = SystemParams(self.n, self.k, self.z)
        self.field_ = FieldContext(self.modulus)
        self.field_.check_supports(self.params_.n)
        A = check_field_matrix(X, self.field_)
        self.n_features_in_ = A.cols
        self.n_rows_ = A.rows
        self.layout_ = self._layout(A.rows, A.cols)
        self._rng = check_generator(self.random_state)
        return self

    def transform(self, X, keys=None):
        """Encode ``X`` into ``n`` shares (fresh keys on every call)."""
        check_is_fitted(self, "params_")
        A = check_field_matrix(X, self.field_)
        if A.cols != self.n_features_in_:
            raise UsageError(f"X has {A.cols} columns, the code was fitted on {self.n_features_in_}")
        return self._encode(A, self.params_, rng=self._rng, keys=keys)

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X).transform(X, **fit_params)

    def inverse_transform(self, shares):
        """Decode from a collection of shares; returns an integer ndarray."""
        check_is_fitted(self, "params_")
        return self._decode(shares).data

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.requires_fit = True
        tags.non_deterministic = self.random_state is None
        return tags


class ClassicalSharing(_SharingCode):
    """(n, k, z) threshold secret sharing of an integer matrix over GF(p).

    Parameters
    ----------
    n, k, z : int
        Workers, reconstruction threshold and collusion bound, ``1 <= z < k <= n``.
    modulus : int
        Prime field size, at least ``n + 1``.
    random_state : int, numpy Generator or None
        Seed for the keys. ``None`` draws keys from the OS entropy pool.
    """

    _encode = staticmethod(classical_encode)

    def _layout(self, m, l):
        return classical_layout(self.params_, m, l)

    def _decode(self, shares):
        return classical_decode(shares, self.params_)


class StaircaseSharing(_SharingCode):
    """Universal Staircase code over GF(p).

    Each share is cut into ``b = LCM{k-z+1, ..., n-z}`` sub-shares; any ``d``
    workers (``k <= d <= n``) decode from their first ``(k-z)/(d-z) * b``
    sub-shares. Parameters are as for :class:`ClassicalSharing`.
    """

    _encode = staticmethod(staircase_encode)

    def _layout(self, m, l):
        return staircase_layout(self.params_, m, l)

    def _decode(self, shares):
        return decode_shares(shares, self.params_)

    def decode(self, responses, d, original_m=None):
        """Decode ``{worker: sub-share prefix}`` responses from ``d`` workers."""
        check_is_fitted(self, "params_")
        if original_m is None:
            original_m = self.n_rows_
        return staircase_decode(responses, d, self.params_, original_m).data

    def communication_cost(self, d):
        check_is_fitted(self, "params_")
        return self.params_.alpha(d)

    @property
    def b_(self):
        check_is_fitted(self, "params_")
        return self.params_.b

