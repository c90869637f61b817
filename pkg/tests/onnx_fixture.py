"""Tiny ONNX writer for test graphs.

Hand-encodes the handful of protobuf messages a minimal model needs, so the
tests can build real .onnx files without an onnx dependency. Only what the
fixtures use is implemented: float32/int64 initializers, Conv/Relu/
GlobalAveragePool/Flatten/Reshape nodes, and single-input single-output
graphs with static shapes.
"""
from __future__ import annotations

import numpy as np

FLOAT = 1
INT64 = 7

_ATTR_INT = 2
_ATTR_INTS = 7


def _varint(n: int) -> bytes:
    out = bytearray()
    while True:
        lo, n = n & 0x7F, n >> 7
        if n:
            out.append(lo | 0x80)
        else:
            out.append(lo)
            return bytes(out)


def _key(field: int, wire: int) -> bytes:
    return _varint((field << 3) | wire)


def _blob(field: int, payload: bytes) -> bytes:
    return _key(field, 2) + _varint(len(payload)) + payload


def _string(field: int, text: str) -> bytes:
    return _blob(field, text.encode())


def _int(field: int, value: int) -> bytes:
    return _key(field, 0) + _varint(value)


def _packed_ints(field: int, values) -> bytes:
    return _blob(field, b"".join(_varint(int(v)) for v in values))


def _tensor(name: str, array: np.ndarray) -> bytes:
    if array.dtype == np.float32:
        dtype = FLOAT
    elif array.dtype == np.int64:
        dtype = INT64
    else:
        raise TypeError(f"unsupported initializer dtype {array.dtype}")
    return (
        _packed_ints(1, array.shape)
        + _int(2, dtype)
        + _string(8, name)
        + _blob(9, array.tobytes())
    )


def _value_info(name: str, shape) -> bytes:
    dims = b"".join(_blob(1, _int(1, int(d))) for d in shape)
    tensor_type = _int(1, FLOAT) + _blob(2, dims)
    return _string(1, name) + _blob(2, _blob(1, tensor_type))


def _attr_int(name: str, value: int) -> bytes:
    return _string(1, name) + _int(3, value) + _int(20, _ATTR_INT)


def _attr_ints(name: str, values) -> bytes:
    return _string(1, name) + _packed_ints(8, values) + _int(20, _ATTR_INTS)


def _node(op_type: str, inputs, outputs, name: str, attrs: bytes = b"") -> bytes:
    body = b"".join(_string(1, i) for i in inputs)
    body += b"".join(_string(2, o) for o in outputs)
    body += _string(3, name) + _string(4, op_type)
    if attrs:
        body += attrs
    return body


def _model(graph: bytes) -> bytes:
    opset = _string(1, "") + _int(2, 13)
    return _int(1, 8) + _blob(7, graph) + _blob(8, opset)


def _graph(nodes, name, initializers, inputs, outputs) -> bytes:
    body = b"".join(_blob(1, n) for n in nodes)
    body += _string(2, name)
    body += b"".join(_blob(5, t) for t in initializers)
    body += b"".join(_blob(11, v) for v in inputs)
    body += b"".join(_blob(12, v) for v in outputs)
    return body


def conv_weights(out_channels: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    W = rng.normal(0.0, 0.05, size=(out_channels, 3, 3, 3)).astype(np.float32)
    b = rng.normal(0.0, 0.5, size=out_channels).astype(np.float32)
    return W, b


def _conv_node(attrs_extra: bytes = b"") -> bytes:
    attrs = (
        _blob(5, _attr_ints("kernel_shape", (3, 3)))
        + _blob(5, _attr_ints("pads", (1, 1, 1, 1)))
        + _blob(5, _attr_ints("strides", (1, 1)))
    )
    return _node("Conv", ("x", "W", "B"), ("conv_out",), "conv0", attrs + attrs_extra)


def conv_relu_model(size: int, out_channels: int = 7, seed: int = 0) -> bytes:
    """Conv(3x3, pad 1) + Relu; output keeps spatial dims (rank 4)."""
    W, b = conv_weights(out_channels, seed)
    nodes = [
        _conv_node(),
        _node("Relu", ("conv_out",), ("y",), "relu0"),
    ]
    graph = _graph(
        nodes,
        "conv_relu",
        [_tensor("W", W), _tensor("B", b)],
        [_value_info("x", (1, 3, size, size))],
        [_value_info("y", (1, out_channels, size, size))],
    )
    return _model(graph)


def conv_gap_flatten_model(size: int, out_channels: int = 5, seed: int = 1) -> bytes:
    """Conv + Relu + GlobalAveragePool + Flatten; output is rank 2."""
    W, b = conv_weights(out_channels, seed)
    nodes = [
        _conv_node(),
        _node("Relu", ("conv_out",), ("act",), "relu0"),
        _node("GlobalAveragePool", ("act",), ("pooled",), "gap0"),
        _node("Flatten", ("pooled",), ("y",), "flat0", _blob(5, _attr_int("axis", 1))),
    ]
    graph = _graph(
        nodes,
        "conv_gap_flatten",
        [_tensor("W", W), _tensor("B", b)],
        [_value_info("x", (1, 3, size, size))],
        [_value_info("y", (1, out_channels))],
    )
    return _model(graph)


def rank3_model(size: int, out_channels: int = 4, seed: int = 2) -> bytes:
    """Conv + Reshape to (1, C, H*W): a rank-3 output no pooling rule fits."""
    W, b = conv_weights(out_channels, seed)
    shape = np.array([1, out_channels, size * size], dtype=np.int64)
    nodes = [
        _conv_node(),
        _node("Reshape", ("conv_out", "shape"), ("y",), "reshape0"),
    ]
    graph = _graph(
        nodes,
        "rank3",
        [_tensor("W", W), _tensor("B", b), _tensor("shape", shape)],
        [_value_info("x", (1, 3, size, size))],
        [_value_info("y", (1, out_channels, size * size))],
    )
    return _model(graph)


def conv_relu_gap_oracle(pixels: np.ndarray, out_channels: int = 7, seed: int = 0) -> np.ndarray:
    """Plain-numpy reference for conv_relu_model followed by global average
    pooling, on a single-channel image replicated to 3 channels."""
    W, b = conv_weights(out_channels, seed)
    x = np.stack([pixels, pixels, pixels]).astype(np.float64)
    padded = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    h, w = pixels.shape
    out = np.zeros((out_channels, h, w))
    for o in range(out_channels):
        acc = np.zeros((h, w))
        for c in range(3):
            for u in range(3):
                for v in range(3):
                    acc += W[o, c, u, v] * padded[c, u : u + h, v : v + w]
        out[o] = acc + b[o]
    out = np.maximum(out, 0.0)
    return out.mean(axis=(1, 2))
