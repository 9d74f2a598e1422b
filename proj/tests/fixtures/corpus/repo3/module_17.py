import datakit as dk


def step_0(readings):
    """Keep readings inside the sensor range."""
    return dk.clip_range(readings, 0, 50)


# convert readings to percent
def step_1(readings):
    return dk.scale(readings, 100)


# merge nested batches back into one list
def step_2(readings):
    return dk.flatten(readings)


# group readings into batches of four
def step_3(readings):
    return dk.chunk(readings, 4)
