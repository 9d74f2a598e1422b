"""Tiny list utilities used by the micro benchmark."""


def mean(values):
    values = list(values)
    if not values:
        raise ValueError("mean of empty sequence")
    return sum(values) / len(values)


def total(values):
    return sum(values)


def count_if(values, predicate):
    return sum(1 for v in values if predicate(v))


def scale(values, factor):
    return [v * factor for v in values]


def clip_range(values, low, high):
    return [min(max(v, low), high) for v in values]


def normalize(values):
    s = sum(values)
    return [v / s for v in values]


def cumulative(values):
    out, acc = [], 0
    for v in values:
        acc += v
        out.append(acc)
    return out


def top_k(values, k):
    return sorted(values, reverse=True)[:k]


def dedupe(values):
    seen, out = set(), []
    for v in values:
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


def chunk(values, size):
    values = list(values)
    return [values[i:i + size] for i in range(0, len(values), size)]


def flatten(nested):
    return [v for part in nested for v in part]


def pairwise(values):
    values = list(values)
    return list(zip(values, values[1:]))


def frequency(values):
    out = {}
    for v in values:
        out[v] = out.get(v, 0) + 1
    return out


def argmax(values):
    values = list(values)
    return max(range(len(values)), key=values.__getitem__)


def zip_dict(keys, values):
    return dict(zip(keys, values))


def window_mean(values, width):
    values = list(values)
    return [sum(values[i:i + width]) / width for i in range(len(values) - width + 1)]
