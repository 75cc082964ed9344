"""Builds the small detector fixture and its reference forward pass.

The reference logits come from a float64 Keras model (Dense tanh on the
first layer, two LSTM layers, Dense output), independent of the Rust code.
Run from this directory: python3 make_detector_golden.py
"""

import json

import numpy as np

D, N, UNITS = 48, 10, 4
READING_SCALE, BITS = 1000, 10
rng = np.random.default_rng(20090715)


def dec(a):
    return np.round(a, 6)


w_quant = rng.integers(-300, 301, size=(D, N))
bias = dec(rng.uniform(-0.1, 0.1, size=N))
lstm = []
inp = 1
for _ in range(2):
    W = dec(rng.uniform(-0.5, 0.5, size=(inp, 4 * UNITS)))
    U = dec(rng.uniform(-0.5, 0.5, size=(UNITS, 4 * UNITS)))
    b = dec(rng.uniform(-0.2, 0.2, size=4 * UNITS))
    lstm.append((W, U, b))
    inp = UNITS
Wo = dec(rng.uniform(-0.8, 0.8, size=(UNITS, 2)))
bo = dec(rng.uniform(-0.05, 0.05, size=2))

readings = rng.integers(0, 3000, size=D)  # 0.000 .. 2.999 kWh


def s(x):
    return repr(float(x))


weights = {
    "version": 1,
    "d": D,
    "n": N,
    "reading_scale": READING_SCALE,
    "weight_scale_bits": BITS,
    "first": {"w_quant": w_quant.tolist(), "bias": [s(v) for v in bias]},
    "lstm": [
        {
            "input_dim": W.shape[0],
            "units": UNITS,
            "W": [[s(v) for v in row] for row in W],
            "U": [[s(v) for v in row] for row in U],
            "b": [s(v) for v in b],
        }
        for (W, U, b) in lstm
    ],
    "output": {"W": [[s(v) for v in row] for row in Wo], "b": [s(v) for v in bo]},
}
with open("weights_small.json", "w") as f:
    json.dump(weights, f, indent=1)

products = readings @ w_quant
acts = np.tanh(products / float(READING_SCALE * (1 << BITS)) + bias)

import keras  # noqa: E402

keras.backend.set_floatx("float64")
x_in = keras.Input(shape=(N, 1), dtype="float64")
h = keras.layers.LSTM(UNITS, return_sequences=True)(x_in)
h = keras.layers.LSTM(UNITS)(h)
out = keras.layers.Dense(2)(h)
model = keras.Model(x_in, out)
model.layers[1].set_weights([lstm[0][0], lstm[0][1], lstm[0][2]])
model.layers[2].set_weights([lstm[1][0], lstm[1][1], lstm[1][2]])
model.layers[3].set_weights([Wo, bo])
logits = model.predict(acts.reshape(1, N, 1), verbose=0)[0]
probs = np.exp(logits - logits.max())
probs /= probs.sum()

golden = {
    "readings_units": readings.tolist(),
    "products": products.tolist(),
    "activations": [s(v) for v in acts],
    "logits": [s(v) for v in logits],
    "probs": [s(v) for v in probs],
}
with open("detector_golden.json", "w") as f:
    json.dump(golden, f, indent=1)
print(golden["probs"])
