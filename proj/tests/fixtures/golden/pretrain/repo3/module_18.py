import datakit as dk

# Useful APIs:
# flatten(nested):Concatenate a list of lists into one flat list.
# merge nested batches back into one list
def step_0(readings):
    return dk.flatten(readings)

# Useful APIs:
# cumulative(values):Running totals of a sequence of numbers.
# running totals of the readings
def step_1(readings):
    return dk.cumulative(readings)
