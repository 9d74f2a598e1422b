import datakit as dk


def step_0(readings):
    """Drop repeated readings."""
    seen = dk.dedupe(readings)
    return seen


# average of the readings
def step_1(readings):
    return dk.mean(readings)
