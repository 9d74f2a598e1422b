import datakit as dk

# Useful APIs:
# flatten(nested):Concatenate a list of lists into one flat list.
# merge nested batches back into one list
def step_0(readings):
    return dk.flatten(readings)

# Useful APIs:
# mean(values):Compute the arithmetic mean of a sequence of numbers.
# average of the readings
def step_1(readings):
    return dk.mean(readings)
