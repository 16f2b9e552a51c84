"""Physical constants and geometry for the native environments.

CartPole and both MountainCar variants use the published classic-control
dynamics so reward scales line up with Gymnasium numbers.
"""

import math

# CartPole
CARTPOLE_GRAVITY = 9.8
CARTPOLE_MASS_CART = 1.0
CARTPOLE_MASS_POLE = 0.1
CARTPOLE_HALF_LENGTH = 0.5  # "length" in the reference code is the half pole length
CARTPOLE_FORCE = 10.0
CARTPOLE_TAU = 0.02
CARTPOLE_THETA_LIMIT = 12 * 2 * math.pi / 360
CARTPOLE_X_LIMIT = 2.4
CARTPOLE_RESET_NOISE = 0.05
CARTPOLE_MAX_STEPS = 500

# MountainCar (discrete actions)
MCAR_MIN_POSITION = -1.2
MCAR_MAX_POSITION = 0.6
MCAR_MAX_SPEED = 0.07
MCAR_D_FORCE = 0.001
MCAR_D_GRAVITY = 0.0025
MCAR_D_GOAL = 0.5
MCAR_D_MAX_STEPS = 200

# MountainCarContinuous
MCAR_C_POWER = 0.0015
MCAR_C_GRAVITY = 0.0025
MCAR_C_GOAL = 0.45
MCAR_C_GOAL_REWARD = 100.0
MCAR_C_ACTION_COST = 0.1
MCAR_C_MAX_STEPS = 999

MCAR_RESET_LOW = -0.6
MCAR_RESET_HIGH = -0.4

# FrozenLake, standard 4x4 map
FROZEN_LAKE_MAP = ("SFFF", "FHFH", "FFFH", "HFFG")
FROZEN_LAKE_MAX_STEPS = 100

# CliffWalking
CLIFF_ROWS = 4
CLIFF_COLS = 12
CLIFF_START = 36
CLIFF_GOAL = 47
CLIFF_PENALTY = -100.0
CLIFF_MAX_STEPS = 100

# Maze; layout lives in assets/maze_3x3.txt
MAZE_STEP_REWARD = -0.011
MAZE_GOAL_REWARD = 1.0
MAZE_MAX_STEPS = 100

# Navigation: square ring track, outer [0, 10]^2 minus the inner block [2, 8]^2
NAV_OUTER = (0.0, 0.0, 10.0, 10.0)
NAV_INNER = (2.0, 2.0, 8.0, 8.0)
NAV_START = (1.0, 5.0)
NAV_START_HEADING = math.pi / 2
NAV_START_JITTER = 0.2
NAV_HEADING_JITTER = 0.1
NAV_LIDAR_ANGLES = tuple(math.radians(a) for a in (-90.0, -45.0, 0.0, 45.0, 90.0))
NAV_LIDAR_RANGE = 15.0
NAV_FORWARD_STEP = 0.1
NAV_TURN = math.radians(15.0)
NAV_FORWARD_REWARD = 5.0
NAV_TURN_REWARD = -0.5
NAV_CRASH_REWARD = -200.0
NAV_MAX_STEPS = 1000

# Nim
NIM_STICKS = 10
NIM_MAX_STEPS = 10

# Pong, unit-square field
PONG_PADDLE_HEIGHT = 0.2
PONG_PADDLE_SPEED = 0.04
PONG_BALL_SPEED = 0.03
PONG_MAX_ANGLE = math.pi / 4
PONG_MAX_HITS = 3
PONG_MAX_STEPS = 1000
