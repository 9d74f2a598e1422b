def tiny_add(a, b):
    return a + b


def tiny_sub(a, b):
    return a - b


def tiny_mul(a, b):
    return a * b


def tiny_div(a, b):
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q
