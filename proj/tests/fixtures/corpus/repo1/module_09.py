import datakit as dk


# drop repeated readings
def step_0(readings):
    seen = dk.dedupe(readings)
    return seen


# how many readings are positive
def step_1(readings):
    return dk.count_if(readings, lambda r: r > 0)
