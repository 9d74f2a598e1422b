import datakit as dk
import tinylib as tl


# how many readings are positive
def step_0(readings):
    return dk.count_if(readings, lambda r: r > 0)


# label each reading
def step_1(labels, readings):
    return dk.zip_dict(labels, readings)


# merge nested batches back into one list
def step_2(readings):
    return dk.flatten(readings)


# position of the peak reading
def step_3(readings):
    return dk.argmax(readings)


# product of the offsets
def step_4(a, b):
    return tl.tiny_mul(a, b)
