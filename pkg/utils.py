import csv
import dataclasses
import hashlib
import json
import math
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime
from enum import Enum

import numpy as np
import pytz

from config import DEFAULT_TIMEZONE

TIMEZONE = pytz.timezone(DEFAULT_TIMEZONE)


def get_current_time():
    return datetime.now(TIMEZONE)


# ==================== RANDOM STREAMS ====================

def _stream_tag(stream):
    if isinstance(stream, int):
        return stream
    return zlib.crc32(str(stream).encode('utf-8'))


def keyed_rng(seed, stream, *index):
    """Counter-based generator keyed by (seed, stream, index...)."""
    spawn_key = (_stream_tag(stream),) + tuple(int(i) for i in index)
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(seq))


def random_signs(rng, shape, kind):
    """Rademacher or standard Gaussian coefficients."""
    from enums import SignKind
    if SignKind(kind) == SignKind.RADEMACHER:
        return rng.choice(np.array([-1.0, 1.0]), size=shape)
    return rng.standard_normal(shape)


def random_unit_vectors(rng, dim, count, p):
    """Complex Gaussian vectors normalized in l^p, one per row."""
    v = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return v / lp_norm(v, p)[:, None]


# ==================== NORMS AND SUMS ====================

def lp_norm(v, p, axis=-1):
    a = np.abs(np.asarray(v))
    if p == 2:
        return np.sqrt(np.sum(a * a, axis=axis))
    scale = np.max(a, axis=axis, keepdims=True)
    scale = np.where(scale > 0, scale, 1.0)
    return np.squeeze(scale, axis=axis) * np.sum((a / scale) ** p, axis=axis) ** (1.0 / p)


def pairwise_sum(items):
    """Sum a sequence along a fixed binary tree."""
    items = list(items)
    if not items:
        return 0.0
    while len(items) > 1:
        paired = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            paired.append(items[-1])
        items = paired
    return items[0]


def geometric_tail(exponent, rate, K, scale=1.0):
    """Bound on sum_{k>K} scale * k^exponent * rate^(k-1).

    Uses the ratio bound ((K+2)/(K+1))^exponent * rate for k >= K+1; returns inf
    when that ratio is not below one.
    """
    if rate <= 0.0 or scale == 0.0:
        return 0.0
    ratio = ((K + 2.0) / (K + 1.0)) ** max(exponent, 0.0) * rate
    if ratio >= 1.0:
        return math.inf
    log_first = math.log(scale) + exponent * math.log(K + 1.0) + K * math.log(rate)
    return math.exp(log_first) / (1.0 - ratio)


def complex_powers(z, K):
    """z^0, ..., z^{K-1} (exact zeros for z = 0)."""
    z = complex(z)
    if z == 0:
        out = np.zeros(K, dtype=np.complex128)
        out[0] = 1.0
        return out
    return np.exp(np.arange(K) * np.log(z))


# ==================== PARALLELISM ====================

def parallel_map(fn, items, threads=1):
    """Order-preserving map over a thread pool."""
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ==================== OUTPUT ====================

def to_jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, 'to_dict'):
            return to_jsonable(obj.to_dict())
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {'re': to_jsonable(float(obj.real)), 'im': to_jsonable(float(obj.imag))}
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
    return obj


def canonical_json(payload):
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + '\n'


def report_digest(text):
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def write_json(path, payload):
    text = canonical_json(payload)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        fh.write(text)
    return text


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path
