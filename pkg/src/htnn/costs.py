"""Parameter and multiply-accumulate (MAC) accounting.

Conventions:

* A MAC is one multiplication plus one accumulation. A bias addition counts
  as one accumulate per output position.
* The 2D Hadamard transforms inside the transform-domain perceptron cost
  zero MACs: they are addition/subtraction butterflies and the
  normalization constant folds into the scaling stage.
* Per path, the transform-domain scaling (multiplies) and the
  soft-thresholding (adds) pair into ``N^2 * C_in`` MACs; the channel-wise
  1x1 mixing costs ``N^2 * C_in * C_out`` MACs and has no bias.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = [
    "LayerCost",
    "CostReport",
    "conv2d_cost",
    "ht_perceptron_cost",
    "dense_cost",
    "toy_model_cost",
    "count_params",
    "count_macs",
    "parse_layer_spec",
    "TOY_CNN",
    "TOY_HT_CNN",
]

TOY_CNN = "toy-cnn"
TOY_HT_CNN = "toy-ht-cnn"


@dataclass(frozen=True)
class LayerCost:
    name: str
    params: int
    macs: int
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CostReport:
    breakdown: tuple[LayerCost, ...]

    @property
    def params(self) -> int:
        return sum(c.params for c in self.breakdown)

    @property
    def macs(self) -> int:
        return sum(c.macs for c in self.breakdown)

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "macs": self.macs,
            "breakdown": [
                {"name": c.name, "params": c.params, "macs": c.macs, **c.detail}
                for c in self.breakdown
            ],
        }


def conv2d_cost(kernel_size: int, c_in: int, c_out: int, spatial: int,
                bias: bool = True, name: str = "conv2d") -> LayerCost:
    """K x K convolution at stride 1 on an ``spatial x spatial`` feature map."""
    params = kernel_size * kernel_size * c_in * c_out + (c_out if bias else 0)
    positions = spatial * spatial
    macs = kernel_size * kernel_size * positions * c_in * c_out
    if bias:
        macs += positions * c_out
    return LayerCost(name, params, macs,
                     {"kernel": kernel_size, "c_in": c_in, "c_out": c_out,
                      "spatial": spatial, "bias": bias})


def ht_perceptron_cost(paths: int, c_in: int, c_out: int, spatial: int,
                       name: str = "ht-perceptron") -> LayerCost:
    """P-path transform-domain perceptron on an ``spatial x spatial`` map.

    Per path: N^2 scale params + N^2 threshold params + C_in*C_out kernel
    params; N^2*C_in MACs for scaling plus thresholding and N^2*C_in*C_out
    MACs for channel mixing. Transform MACs are zero by convention.
    """
    n2 = spatial * spatial
    params = paths * (2 * n2 + c_in * c_out)
    macs = paths * (n2 * c_in + n2 * c_in * c_out)
    return LayerCost(name, params, macs,
                     {"paths": paths, "c_in": c_in, "c_out": c_out, "spatial": spatial})


def dense_cost(fan_in: int, fan_out: int, bias: bool = True,
               name: str = "dense") -> LayerCost:
    params = fan_in * fan_out + (fan_out if bias else 0)
    macs = fan_in * fan_out + (fan_out if bias else 0)
    return LayerCost(name, params, macs,
                     {"fan_in": fan_in, "fan_out": fan_out, "bias": bias})


def toy_model_cost(arch: str, paths: int = 3, image_size: int = 32,
                   channels: int = 32, dense_units: int = 128,
                   classes: int = 10) -> CostReport:
    """Cost table for the small image classifier and its transform-domain variant.

    The two architectures differ only in the second convolution slot.
    """
    if arch == TOY_CNN:
        second = conv2d_cost(3, channels, channels, image_size, bias=True, name="conv2")
    elif arch == TOY_HT_CNN:
        second = ht_perceptron_cost(paths, channels, channels, image_size,
                                    name=f"ht-perceptron({paths}-path)")
    else:
        raise ValueError(f"unknown architecture {arch!r}")
    pooled = image_size // 2
    flat = channels * pooled * pooled
    layers = (
        conv2d_cost(3, 1, channels, image_size, bias=True, name="conv1"),
        second,
        dense_cost(flat, dense_units, name="dense1"),
        dense_cost(dense_units, classes, name="dense2"),
    )
    return CostReport(layers)


def count_params(cost: LayerCost | CostReport) -> int:
    return cost.params


def count_macs(cost: LayerCost | CostReport) -> int:
    return cost.macs


def parse_layer_spec(spec: str, bias: bool = False) -> LayerCost:
    """Parse ``conv:K,C,N`` or ``htp:P,C,N`` layer descriptors (bias-free by default)."""
    try:
        kind, rest = spec.split(":", 1)
        a, c, n = (int(v) for v in rest.split(","))
    except ValueError:
        raise ValueError(
            f"bad layer spec {spec!r}; expected conv:K,C,N or htp:P,C,N"
        ) from None
    if kind == "conv":
        return conv2d_cost(a, c, c, n, bias=bias, name=spec)
    if kind == "htp":
        return ht_perceptron_cost(a, c, c, n, name=spec)
    raise ValueError(f"unknown layer kind {kind!r}; expected conv or htp")
