"""
Information carried by a neighbour's output
===========================================

A listener reads a noisy binary sensor and also hears one of two speakers.
Whether the speakers agree on their code decides how much the listener
learns beyond its own sensor.
"""

import numpy as np

from codevo import PopulationModel, build_joint, env_info_pair, side_information, symmetric_sensor
from codevo.infotheory import conditional_mutual_information, mutual_information
from codevo.model import MU, X_P, Y

# every agent sees the binary world through a 1% bit flip
sensor = symmetric_sensor(2, 0.01).table

# agent 0 listens to agents 1 and 2 with equal probability
structure = np.zeros((3, 3))
structure[0, 1] = structure[0, 2] = 0.5

identity = np.eye(2)
for label, speaker_codes in [("shared code", [identity, identity]),
                             ("opposite codes", [identity, identity[::-1]])]:
    codes = np.stack([identity] + speaker_codes)
    model = PopulationModel.from_arrays([0.5, 0.5], sensor, codes, structure)
    print(f"{label:>15}:  I(mu; Y, X') = {env_info_pair(model):.6f} bits, "
          f"side information {side_information(model):.6f}")

# the same numbers from the fully assembled seven-variable joint
joint = build_joint(model)
own = mutual_information(joint, MU, Y)
side = conditional_mutual_information(joint, MU, X_P, Y)
print(f"chain rule on the joint: {own:.6f} + {side:.6f} = {mutual_information(joint, MU, (Y, X_P)):.6f}")
