import math

import numpy as np

from engine.signals import Window


def parse_schedule(text: str) -> list[float]:
    """
    Parse the schedule mini-language used for mean values and translation grids.
    Args:
        text: str: 'linear:a:b:k', 'geometric:a:ratio:k', 'pow2tower:n' or '1,2,3'
    Returns:
        list[float]: The schedule, in the order given by the rule.
    """
    kind, _, rest = text.strip().partition(":")
    args = rest.split(":") if rest else []
    if kind == "linear":
        if len(args) != 3:
            raise ValueError(f"linear schedule needs a:b:k, got '{text}'")
        a, b, k = float(args[0]), float(args[1]), int(args[2])
        if k < 1:
            raise ValueError(f"linear schedule needs k >= 1, got {k}")
        return [float(x) for x in np.linspace(a, b, k)]
    if kind == "geometric":
        if len(args) != 3:
            raise ValueError(f"geometric schedule needs a:ratio:k, got '{text}'")
        a, ratio, k = float(args[0]), float(args[1]), int(args[2])
        if a <= 0 or ratio <= 1 or k < 1:
            raise ValueError(f"geometric schedule needs a > 0, ratio > 1, k >= 1, got '{text}'")
        return [a * ratio**i for i in range(k)]
    if kind == "pow2tower":
        if len(args) != 1:
            raise ValueError(f"pow2tower schedule needs n, got '{text}'")
        n = int(args[0])
        if not 1 <= n <= 6:
            raise ValueError(f"pow2tower schedule needs 1 <= n <= 6, got {n}")
        return pow2tower(n)
    return parse_float_list(text)


def pow2tower(n: int) -> list[float]:
    """
    The pairs T = 2^(2^i) and T = 2^(2^i) + 1 for i = 1..n.
    Args:
        n: int: Number of pairs.
    Returns:
        list[float]: [4, 5, 16, 17, 256, 257, ...]
    """
    out: list[float] = []
    for i in range(1, n + 1):
        tower = 2 ** (2**i)
        out.extend([float(tower), float(tower + 1)])
    return out


def parse_float_list(text: str) -> list[float]:
    """
    Args:
        text: str: '0,0.5,1'
    Returns:
        list[float]: [0.0, 0.5, 1.0]
    """
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ValueError(f"Expected a comma-separated list of numbers, got '{text}'") from exc
    if not values or not all(math.isfinite(v) for v in values):
        raise ValueError(f"Expected finite numbers, got '{text}'")
    return values


def parse_window(text: str) -> Window:
    """
    Args:
        text: str: 'a:b' with a < b
    Returns:
        Window: The window [a, b].
    """
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"Window must look like a:b, got '{text}'")
    return Window(float(parts[0]), float(parts[1]))


def parse_cells(text: str) -> tuple[int, int]:
    """
    Args:
        text: str: 'K0:K1' with K0 <= K1
    Returns:
        tuple[int, int]: (K0, K1)
    """
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"Cells must look like K0:K1, got '{text}'")
    k0, k1 = int(parts[0]), int(parts[1])
    if k0 > k1:
        raise ValueError(f"Cells need K0 <= K1, got '{text}'")
    return k0, k1
