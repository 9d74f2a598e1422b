import datakit as dk

# Useful APIs:
# argmax(values):Index of the largest value of a sequence.
# position of the peak reading
def step_0(readings):
    return dk.argmax(readings)

# Useful APIs:
# top_k(values, k):Return the k largest values in descending order.
# three largest readings
def step_1(readings):
    return dk.top_k(readings, 3)

# Useful APIs:
# frequency(values):Count the occurrences of each distinct value in a dictionary.
# histogram of reading values
def step_2(readings):
    return dk.frequency(readings)

# Useful APIs:
# chunk(values, size):Split a sequence into consecutive chunks of a given size.
WINDOW = dk.chunk([1, 2, 3, 4], 2)
