"""Generalized n-dimensional cross product, derived vector calculus and Helmholtz splits."""

from .algebra import (SkewMatrix, anti, cross, cross_dim, cross_matrix, cross_matrix_sparse,
                      cross_oracle, cross_left, cross_right, dyad_from_room, grassmann_triple,
                      index_to_pair, jacobi_sum, matrix_cross_block, pair_to_index,
                      room_product, sandwich, simultaneous_cross, skew_from_vec,
                      vec_from_skew)
from .calculus import (adjoint_curl, curl_n, derivative, div, grad, inc_n, laplacian,
                       matrix_curl, matrix_div)
from .errors import ConfigurationError, DomainError, FieldFormatError, PreconditionError
from .fields import Field, Grid, band_limited, read_field, write_field
from .helmholtz import riesz_decompose, spectral_decompose

__all__ = [
    "SkewMatrix",
    "anti",
    "cross",
    "cross_dim",
    "cross_matrix",
    "cross_matrix_sparse",
    "cross_oracle",
    "cross_left",
    "cross_right",
    "dyad_from_room",
    "grassmann_triple",
    "index_to_pair",
    "jacobi_sum",
    "matrix_cross_block",
    "pair_to_index",
    "room_product",
    "sandwich",
    "simultaneous_cross",
    "skew_from_vec",
    "vec_from_skew",
    "adjoint_curl",
    "curl_n",
    "derivative",
    "div",
    "grad",
    "inc_n",
    "laplacian",
    "matrix_curl",
    "matrix_div",
    "ConfigurationError",
    "DomainError",
    "FieldFormatError",
    "PreconditionError",
    "Field",
    "Grid",
    "band_limited",
    "read_field",
    "write_field",
    "riesz_decompose",
    "spectral_decompose",
]

__version__ = "0.1.0"
