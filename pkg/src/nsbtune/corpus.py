"""Embedded benchmark programs.

Six small numerical kernels from the embedded-systems / IoT / numerical
analysis repertoire: a PID controller, an accelerometer tilt computation, a
two-wheeled-robot odometry loop, a simple pendulum, a Runge-Kutta
integrator, and the trapezoidal rule. Each carries an in-source accuracy
directive on its result variable; the bench driver overrides the bit count
per grid point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

from .frontend import LabeledProgram, parse


@dataclass(frozen=True)
class BenchmarkCase:
    name: str
    source: str
    require_var: str

    def program(self) -> LabeledProgram:
        return parse(self.source)

    @property
    def has_inputs(self) -> bool:
        return "input " in self.source


PID = BenchmarkCase("pid", """\
dt = 0.5; invdt = 0.5;
kp = 9.4514; ki = 0.69006;
kd = 2.8454; c = 5.0;
m = 8.0; e = 0.0;
p = 0.0; i = 0.0;
d = 0.0; r = 0.0;
m1 = m; eold = 0.0;
t = 0.0;
while (t < 100.0) {
  e = c - m1;
  p = kp * e;
  i = i + ki * dt * e;
  d = kd * invdt * e - eold;
  r = p + i + d;
  m1 = m1 + 0.01 * r;
  eold = e;
  t = t + dt;
}
require_nsb(m1, 12);
""", "m1")


ACCELEROMETER = BenchmarkCase("accelerometer", """\
input ax in [1.7, 1.99];
input ay in [0.6, 0.9];
input az in [1.0, 1.55];
g = ax * ax + ay * ay + az * az;
norm = sqrt(g);
ratio = ax / az;
tilt = atan(ratio);
require_nsb(tilt, 12);
""", "tilt")


ODOMETRY = BenchmarkCase("odometry", """\
sl = 0.5246; sr = 0.5894;
wr = 0.1; c = 1.0;
theta = 0.1; t = 0.0;
x = 0.0; y = 0.0;
while (t < 50.0) {
  dl = wr * sl * c;
  dr = wr * sr * c;
  dc = (dl + dr) * 0.5;
  dth = (dr - dl) * 4.0;
  arg = theta + dth * 0.5;
  x = x + dc * cos(arg);
  y = y + dc * sin(arg);
  theta = theta + dth;
  t = t + 1.0;
}
require_nsb(x, 12);
""", "x")


PENDULUM = BenchmarkCase("pendulum", """\
g = 9.80665; l = 1.25;
dt = 0.03125; t = 0.0;
th = 0.785398; w = 0.0;
while (t < 2.25) {
  a = (0.0 - g) / l * sin(th);
  w = w + a * dt;
  th = th + w * dt;
  t = t + dt;
}
elong = l * sin(th);
require_nsb(elong, 12);
""", "elong")


RUNGE_KUTTA = BenchmarkCase("runge_kutta", """\
input y0 in [0.75, 1.5];
c = 3.0; h = 0.25;
t = 0.0; y = y0;
while (t < 5.0) {
  k1 = 0.5 * (c - y);
  k2 = 0.5 * (c - (y + 0.5 * h * k1));
  k3 = 0.5 * (c - (y + 0.5 * h * k2));
  k4 = 0.5 * (c - (y + h * k3));
  y = y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) * 0.166666666666666666;
  t = t + h;
}
require_nsb(y, 12);
""", "y")


TRAPEZOID = BenchmarkCase("trapezoid", """\
h = 0.125; x = 1.0;
s = 0.0; m = 0.0;
while (x < 4.0) {
  fa = 1.0 / (x * x);
  fb = 1.0 / ((x + h) * (x + h));
  s = s + (fa + fb) * h * 0.5;
  xm = x + h * 0.5;
  m = m + h / (xm * xm);
  x = x + h;
}
require_nsb(s, 12);
""", "s")


CASES: Dict[str, BenchmarkCase] = {c.name: c for c in
                                   (ACCELEROMETER, ODOMETRY, PENDULUM, PID,
                                    RUNGE_KUTTA, TRAPEZOID)}
