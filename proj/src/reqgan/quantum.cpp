#include "reqgan/quantum.hpp"

#include <cmath>
#include <string>

namespace reqgan::quantum {

namespace {

std::size_t dim_for(int qubits) { return std::size_t{1} << qubits; }

void check_qubit(const ComplexState& state, int q) {
  if (q < 0 || q >= state.num_qubits()) {
    throw UsageError("qubit index " + std::to_string(q) + " out of range");
  }
}

void rot_y(ComplexState& state, int q, double theta) {
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  const std::size_t stride = std::size_t{1} << q;
  auto& a = state.amplitudes;
  for (std::size_t base = 0; base < a.size(); base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const Amplitude a0 = a[i];
      const Amplitude a1 = a[i + stride];
      a[i] = c * a0 - s * a1;
      a[i + stride] = s * a0 + c * a1;
    }
  }
}

void rot_z(ComplexState& state, int q, double theta) {
  const Amplitude lo = std::polar(1.0, -0.5 * theta);
  const Amplitude hi = std::polar(1.0, 0.5 * theta);
  const std::size_t mask = std::size_t{1} << q;
  auto& a = state.amplitudes;
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] *= (i & mask) ? hi : lo;
  }
}

void cnot(ComplexState& state, int control, int target) {
  const std::size_t cmask = std::size_t{1} << control;
  const std::size_t tmask = std::size_t{1} << target;
  auto& a = state.amplitudes;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((i & cmask) && !(i & tmask)) {
      std::swap(a[i], a[i | tmask]);
    }
  }
}

// Re <mu| dU/dtheta |phi> for a rotation gate, phi being the state before the gate.
double rotation_overlap(const ComplexState& mu, const ComplexState& phi, const Gate& g,
                        double theta) {
  const auto& m = mu.amplitudes;
  const auto& p = phi.amplitudes;
  const std::size_t stride = std::size_t{1} << g.qubit;
  Amplitude acc{0.0, 0.0};
  if (g.kind == GateKind::RotY) {
    const double hc = 0.5 * std::cos(0.5 * theta);
    const double hs = 0.5 * std::sin(0.5 * theta);
    for (std::size_t base = 0; base < p.size(); base += 2 * stride) {
      for (std::size_t i = base; i < base + stride; ++i) {
        const Amplitude d0 = -hs * p[i] - hc * p[i + stride];
        const Amplitude d1 = hc * p[i] - hs * p[i + stride];
        acc += std::conj(m[i]) * d0 + std::conj(m[i + stride]) * d1;
      }
    }
  } else {
    const Amplitude dlo = Amplitude{0.0, -0.5} * std::polar(1.0, -0.5 * theta);
    const Amplitude dhi = Amplitude{0.0, 0.5} * std::polar(1.0, 0.5 * theta);
    for (std::size_t i = 0; i < p.size(); ++i) {
      acc += std::conj(m[i]) * ((i & stride) ? dhi : dlo) * p[i];
    }
  }
  return acc.real();
}

double angle_of(const Gate& g, std::span<const double> z, std::span<const double> angles) {
  switch (g.source) {
    case AngleSource::Input:
      return z[g.param];
    case AngleSource::Circuit:
      return angles[g.param];
    case AngleSource::None:
      break;
  }
  return 0.0;
}

}  // namespace

double ComplexState::norm_squared() const {
  double s = 0.0;
  for (const auto& a : amplitudes) {
    s += std::norm(a);
  }
  return s;
}

CircuitLayout CircuitLayout::linear_chain(int data_qubits, int layers, int rotations) {
  CircuitLayout layout;
  layout.data_qubits = data_qubits;
  layout.layers = layers;
  layout.rotations = rotations;
  for (int q = 0; q < data_qubits; ++q) {
    layout.entanglers.push_back({q, q + 1});
  }
  layout.validate();
  return layout;
}

void CircuitLayout::validate() const {
  if (data_qubits < 1) {
    throw ConfigError("circuit needs at least one data qubit");
  }
  if (data_qubits > 24) {
    throw ConfigError("circuit too large for dense simulation (data_qubits > 24)");
  }
  if (layers < 1) {
    throw ConfigError("circuit needs at least one layer");
  }
  if (rotations != 1 && rotations != 2) {
    throw ConfigError("rotations per qubit must be 1 or 2");
  }
  for (const auto& e : entanglers) {
    if (e.control < 0 || e.control > data_qubits || e.target < 0 || e.target > data_qubits) {
      throw ConfigError("entangler references an invalid qubit");
    }
    if (e.control == e.target) {
      throw ConfigError("entangler control equals target");
    }
  }
}

std::vector<Gate> compile(const CircuitLayout& layout) {
  std::vector<Gate> gates;
  for (int q = 0; q < layout.data_qubits; ++q) {
    gates.push_back({GateKind::RotY, q, -1, AngleSource::Input, static_cast<std::size_t>(q)});
  }
  for (int l = 0; l < layout.layers; ++l) {
    for (int q = 0; q < layout.num_qubits(); ++q) {
      gates.push_back(
          {GateKind::RotY, q, -1, AngleSource::Circuit, layout.angle_index(l, q, 0)});
      if (layout.rotations == 2) {
        gates.push_back(
            {GateKind::RotZ, q, -1, AngleSource::Circuit, layout.angle_index(l, q, 1)});
      }
    }
    for (const auto& e : layout.entanglers) {
      gates.push_back({GateKind::Cnot, e.target, e.control, AngleSource::None, 0});
    }
  }
  return gates;
}

void apply_gate(ComplexState& state, const Gate& gate, double angle) {
  check_qubit(state, gate.qubit);
  switch (gate.kind) {
    case GateKind::RotY:
      rot_y(state, gate.qubit, angle);
      break;
    case GateKind::RotZ:
      rot_z(state, gate.qubit, angle);
      break;
    case GateKind::Cnot:
      check_qubit(state, gate.control);
      cnot(state, gate.control, gate.qubit);
      break;
  }
}

void apply_inverse_gate(ComplexState& state, const Gate& gate, double angle) {
  // Rotations invert by negating the angle; CNOT is self-inverse.
  apply_gate(state, gate, -angle);
}

ComplexState zero_state(int data_qubits) {
  if (data_qubits < 1) {
    throw ConfigError("state needs at least one data qubit");
  }
  ComplexState s;
  s.num_data_qubits = data_qubits;
  s.amplitudes.assign(dim_for(data_qubits + 1), Amplitude{0.0, 0.0});
  s.amplitudes[0] = 1.0;
  return s;
}

ComplexState prepare_state(std::span<const double> z, int data_qubits) {
  if (z.size() != static_cast<std::size_t>(data_qubits)) {
    throw ConfigError("prepare_state: z has " + std::to_string(z.size()) +
                      " entries but the register has " + std::to_string(data_qubits) +
                      " data qubits");
  }
  if (!all_finite(z)) {
    throw NumericalError("prepare_state: non-finite input angle");
  }
  ComplexState s = zero_state(data_qubits);
  for (int q = 0; q < data_qubits; ++q) {
    rot_y(s, q, z[q]);
  }
  return s;
}

ComplexState apply_circuit(ComplexState state, const CircuitLayout& layout,
                           std::span<const double> angles) {
  if (state.num_data_qubits != layout.data_qubits) {
    throw ConfigError("apply_circuit: state and layout disagree on data qubit count");
  }
  if (angles.size() != layout.num_angles()) {
    throw ConfigError("apply_circuit: expected " + std::to_string(layout.num_angles()) +
                      " angles, got " + std::to_string(angles.size()));
  }
  for (const auto& g : compile(layout)) {
    if (g.source == AngleSource::Input) {
      continue;
    }
    apply_gate(state, g, g.source == AngleSource::Circuit ? angles[g.param] : 0.0);
  }
  return state;
}

ConditionalDistribution conditional_probs(const ComplexState& state, double acceptance_floor) {
  const std::size_t n = dim_for(state.num_data_qubits);
  ConditionalDistribution d;
  d.probs.resize(n);
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d.probs[i] = std::norm(state.amplitudes[i]);
    mass += d.probs[i];
  }
  if (!(mass > acceptance_floor)) {
    throw DegeneratePostSelection("ancilla-0 acceptance " + std::to_string(mass) +
                                  " is below the floor " + std::to_string(acceptance_floor));
  }
  for (double& p : d.probs) {
    p /= mass;
  }
  d.acceptance = mass;
  return d;
}

CircuitTape forward(std::span<const double> z, const CircuitLayout& layout,
                    std::span<const double> angles, double acceptance_floor) {
  CircuitTape tape;
  tape.z.assign(z.begin(), z.end());
  tape.angles.assign(angles.begin(), angles.end());
  tape.final_state = apply_circuit(prepare_state(z, layout.data_qubits), layout, angles);
  tape.dist = conditional_probs(tape.final_state, acceptance_floor);
  tape.valid = true;
  return tape;
}

CircuitGradients backward(const CircuitTape& tape, const CircuitLayout& layout,
                          std::span<const double> grad_probs) {
  if (!tape.valid) {
    throw UsageError("quantum backward called without a completed forward pass");
  }
  const std::size_t n = tape.dist.probs.size();
  if (grad_probs.size() != n) {
    throw UsageError("quantum backward: gradient length does not match distribution");
  }
  // Through the renormalisation: probs_i = P_i / A with A = sum_j P_j.
  double weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weighted += grad_probs[i] * tape.dist.probs[i];
  }
  ComplexState mu;
  mu.num_data_qubits = tape.final_state.num_data_qubits;
  mu.amplitudes.assign(tape.final_state.amplitudes.size(), Amplitude{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    const double dp = (grad_probs[i] - weighted) / tape.dist.acceptance;
    mu.amplitudes[i] = dp * tape.final_state.amplitudes[i];
  }

  CircuitGradients grads;
  grads.z.assign(tape.z.size(), 0.0);
  grads.angles.assign(tape.angles.size(), 0.0);

  ComplexState phi = tape.final_state;
  const auto gates = compile(layout);
  for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
    const Gate& g = *it;
    const double theta = angle_of(g, tape.z, tape.angles);
    apply_inverse_gate(phi, g, theta);
    if (g.source != AngleSource::None) {
      const double d = 2.0 * rotation_overlap(mu, phi, g, theta);
      (g.source == AngleSource::Input ? grads.z : grads.angles)[g.param] += d;
    }
    apply_inverse_gate(mu, g, theta);
  }
  return grads;
}

}  // namespace reqgan::quantum
