"""Closed bank of integrands for energy evaluation."""

import logging
from typing import Any, Dict, List, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from orientlam.enums import IntegrandKind
from orientlam.exceptions import UnknownIntegrandError
from orientlam.utils.matrix import determinants, frobenius_norms

logger = logging.getLogger(__name__)


def _stvenant_volume_term(det: np.ndarray) -> np.ndarray:
    """Convex C^1 penalty: (t-1)^2 for t >= 0, continued linearly as 1 - 2t for t < 0."""
    return np.where(det >= 0.0, (det - 1.0) ** 2, 1.0 - 2.0 * det)


class Integrand(BaseModel):
    """
    Integrand f(A) selected from the closed bank.

    Tags: ``pnorm:p``, ``det``, ``negdet_q:q`` and ``stvenant:p,c1,c2``.
    """

    model_config = ConfigDict(frozen=True)

    kind: IntegrandKind = Field(..., description="Integrand kind")
    p: float = Field(2.0, ge=1.0, description="Exponent of the norm term")
    q: float = Field(1.0, gt=0.0, description="Exponent of the negative-determinant term")
    c1: float = Field(1.0, ge=0.0, description="Weight of the norm term (stvenant)")
    c2: float = Field(1.0, ge=0.0, description="Weight of the volume term (stvenant)")

    @field_validator("kind", mode="before")
    @classmethod
    def validate_kind(cls, v: Union[str, IntegrandKind]) -> IntegrandKind:
        """Accept enum members or tag strings."""
        if isinstance(v, IntegrandKind):
            return v
        return IntegrandKind.from_string(str(v))

    @classmethod
    def parse(cls, tag: str) -> "Integrand":
        """
        Parse an integrand tag.

        Args:
            tag: Tag such as ``pnorm:2`` or ``stvenant:2,1,0.5``

        Returns:
            Integrand

        Raises:
            UnknownIntegrandError: If the tag is not in the bank or its parameters are invalid
        """
        name, _, params = tag.strip().partition(":")
        try:
            values: List[float] = [float(x) for x in params.split(",")] if params else []
            kind = IntegrandKind.from_string(name)
            data: Dict[str, Any] = {"kind": kind}
            if kind == IntegrandKind.PNORM and values:
                data["p"] = values[0]
            elif kind == IntegrandKind.NEGDET_Q and values:
                data["q"] = values[0]
            elif kind == IntegrandKind.STVENANT:
                for key, value in zip(("p", "c1", "c2"), values):
                    data[key] = value
            return cls(**data)
        except (ValueError, ValidationError) as e:
            logger.error(f"Unknown integrand tag: {tag}")
            raise UnknownIntegrandError(f"Unknown integrand: {tag}") from e

    @property
    def tag(self) -> str:
        """Canonical tag of this integrand."""
        if self.kind == IntegrandKind.PNORM:
            return f"pnorm:{self.p!r}"
        if self.kind == IntegrandKind.NEGDET_Q:
            return f"negdet_q:{self.q!r}"
        if self.kind == IntegrandKind.STVENANT:
            return f"stvenant:{self.p!r},{self.c1!r},{self.c2!r}"
        return self.kind.value

    def evaluate(self, matrices: np.ndarray) -> np.ndarray:
        """
        Evaluate f on a stack of matrices.

        Args:
            matrices: Array of shape (k, d, d)

        Returns:
            Array of shape (k,)
        """
        if self.kind == IntegrandKind.PNORM:
            return frobenius_norms(matrices) ** self.p
        det = determinants(matrices)
        if self.kind == IntegrandKind.DET:
            return det
        if self.kind == IntegrandKind.NEGDET_Q:
            return np.where(det < 0.0, np.abs(det) ** self.q, 0.0)
        return self.c1 * frobenius_norms(matrices) ** self.p + self.c2 * _stvenant_volume_term(
            det
        )


def resolve_integrand(integrand: Union[str, Integrand]) -> Integrand:
    """Accept an Integrand or its tag."""
    if isinstance(integrand, Integrand):
        return integrand
    if isinstance(integrand, str):
        return Integrand.parse(integrand)
    raise UnknownIntegrandError(f"Unknown integrand: {integrand!r}")
