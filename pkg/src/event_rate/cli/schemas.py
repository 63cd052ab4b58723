from __future__ import annotations

from typing import List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from event_rate.cli.constants import MODE_CUSTOM_VECTOR, MODE_SCALAR_COMPLEX, MODE_SCALAR_REAL

# a complex scalar is written as [re, im] or as a string like "0.3+2j"
ComplexLike = Union[float, Tuple[float, float], str]


def to_scalar(v: ComplexLike) -> Union[float, complex]:
    if isinstance(v, (tuple, list)):
        re, im = v
        return complex(re, im)
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return float(v)


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PlantBlock(_Block):
    A: ComplexLike
    B: ComplexLike = 1.0
    K: ComplexLike
    M: float = Field(ge=0.0)


class TriggerBlock(_Block):
    gamma: float = Field(ge=0.0)
    rho0: float = Field(default=0.9, gt=0.0, lt=1.0)
    b: float = Field(default=1.0001, gt=1.0)
    # None: derive J from the delay bound with J_offset of slack
    J: Optional[float] = Field(default=None, gt=0.0)
    J_offset: float = Field(default=0.1, ge=0.0)
    lam: Optional[int] = Field(default=None, ge=1)
    lam_rule: Literal["smallest", "rule-of-thumb"] = "smallest"
    chi: float = Field(default=0.125, gt=0.0, lt=1.0)
    chi_prime: float = Field(default=0.125, gt=0.0, lt=1.0)


class ChannelBlock(_Block):
    kind: Literal["constant", "uniform-on-grid", "adversarial-max", "scripted"] = "uniform-on-grid"
    delay: Optional[float] = Field(default=None, ge=0.0)
    delays: Optional[List[float]] = None


class DisturbanceBlock(_Block):
    kind: Literal["zero", "constant-max", "uniform", "sinusoid", "scripted"] = "uniform"
    sign: float = 1.0
    phase: float = 0.0
    omega: float = 1.0
    amplitude: float = Field(default=1.0, ge=0.0, le=1.0)
    values: Optional[List[ComplexLike]] = None


class InitialBlock(_Block):
    x0: ComplexLike = 0.0
    xhat0: Optional[ComplexLike] = None


class VectorBlock(_Block):
    # A, B, K default to the built-in cart-pole in pendulum mode
    A: Optional[List[List[float]]] = None
    B: Optional[List[float]] = None
    K: Optional[List[float]] = None
    M: float = Field(default=0.05, ge=0.0)
    s0: Optional[List[float]] = None
    shat0: Optional[List[float]] = None


class SweepBlock(_Block):
    param: Literal["gamma"] = "gamma"
    lo: float = Field(ge=0.0)
    hi: float = Field(ge=0.0)
    points: int = Field(ge=1)

    @model_validator(mode="after")
    def _ordered(self) -> "SweepBlock":
        if self.hi < self.lo:
            raise ValueError(f"sweep hi={self.hi} is below lo={self.lo}")
        return self

    def grid(self) -> List[float]:
        if self.points == 1:
            return [self.lo]
        step = (self.hi - self.lo) / (self.points - 1)
        return [self.lo + i * step for i in range(self.points)]


class AdversaryBlock(_Block):
    target: Literal["restricted", "general"] = "restricted"
    alpha: Optional[float] = Field(default=None, ge=0.0)
    upsilon: Optional[float] = Field(default=None, ge=0.0)
    n_events: int = Field(default=64, ge=1)


class ExperimentConfig(_Block):
    mode: Literal["scalar-real", "scalar-complex", "pendulum", "custom-vector"]
    preset: Optional[str] = None
    plant: Optional[PlantBlock] = None
    trigger: TriggerBlock
    channel: ChannelBlock = ChannelBlock()
    disturbance: DisturbanceBlock = DisturbanceBlock()
    initial: InitialBlock = InitialBlock()
    vector: Optional[VectorBlock] = None
    codec: Literal["sufficient", "minimal"] = "sufficient"
    localization: Literal["exact", "grid"] = "exact"
    dt: float = Field(default=0.005, gt=0.0)
    T: float = Field(default=5.0, ge=0.0)
    seed: int = 0
    sweep: Optional[SweepBlock] = None
    adversary: Optional[AdversaryBlock] = None

    @model_validator(mode="after")
    def _blocks_match_mode(self) -> "ExperimentConfig":
        if self.mode in (MODE_SCALAR_REAL, MODE_SCALAR_COMPLEX) and self.plant is None:
            raise ValueError(f"mode '{self.mode}' needs a 'plant' block")
        if self.mode == MODE_SCALAR_REAL and self.plant is not None:
            if any(isinstance(to_scalar(v), complex) for v in (self.plant.A, self.plant.B, self.plant.K)):
                raise ValueError("scalar-real mode given complex plant values")
        if self.mode == MODE_CUSTOM_VECTOR:
            v = self.vector
            if v is None or v.A is None or v.B is None or v.K is None:
                raise ValueError("custom-vector mode needs vector.A, vector.B and vector.K")
        return self
