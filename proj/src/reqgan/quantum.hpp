#pragma once

// Dense statevector simulation of the generator circuit: R_y state
// preparation on the data register, an L-layer rotation/CNOT ansatz over data
// qubits plus one ancilla, and post-selection on the ancilla reading 0.
//
// Qubit q occupies bit q of the basis index. Data qubits are 0..D-1 and the
// ancilla is qubit D (highest order), so basis index i < 2^D with the ancilla
// in |0> maps directly to pixel i.

#include <complex>
#include <span>
#include <vector>

#include "reqgan/common.hpp"

namespace reqgan::quantum {

using Amplitude = std::complex<double>;

inline constexpr double kAcceptanceFloor = 1e-6;

struct ComplexState {
  std::vector<Amplitude> amplitudes;
  int num_data_qubits = 0;

  int num_qubits() const { return num_data_qubits + 1; }
  int ancilla_index() const { return num_data_qubits; }
  double norm_squared() const;
};

struct Entangler {
  int control = 0;
  int target = 0;
};

// Shape of the trainable ansatz. Angles live outside the layout as a flat
// vector indexed by angle_index(layer, qubit, rotation).
struct CircuitLayout {
  int data_qubits = 1;
  int layers = 1;
  int rotations = 2;  // 1: R_y only, 2: R_y then R_z
  std::vector<Entangler> entanglers;  // applied after the rotations of every layer

  static CircuitLayout linear_chain(int data_qubits, int layers, int rotations = 2);

  int num_qubits() const { return data_qubits + 1; }
  std::size_t num_angles() const {
    return static_cast<std::size_t>(layers) * num_qubits() * rotations;
  }
  std::size_t angle_index(int layer, int qubit, int rotation) const {
    return (static_cast<std::size_t>(layer) * num_qubits() + qubit) * rotations + rotation;
  }
  void validate() const;
};

struct ConditionalDistribution {
  std::vector<double> probs;
  double acceptance = 0.0;
};

enum class GateKind { RotY, RotZ, Cnot };

// Which parameter vector a rotation reads its angle from.
enum class AngleSource { Input, Circuit, None };

struct Gate {
  GateKind kind;
  int qubit;   // target
  int control; // CNOT only
  AngleSource source;
  std::size_t param;
};

// Full gate list: D input rotations followed by the ansatz.
std::vector<Gate> compile(const CircuitLayout& layout);

void apply_gate(ComplexState& state, const Gate& gate, double angle);
void apply_inverse_gate(ComplexState& state, const Gate& gate, double angle);

ComplexState zero_state(int data_qubits);
ComplexState prepare_state(std::span<const double> z, int data_qubits);
ComplexState apply_circuit(ComplexState state, const CircuitLayout& layout,
                           std::span<const double> angles);
ConditionalDistribution conditional_probs(const ComplexState& state,
                                          double acceptance_floor = kAcceptanceFloor);

// Forward pass with everything the adjoint sweep needs.
struct CircuitTape {
  std::vector<double> z;
  std::vector<double> angles;
  ComplexState final_state;
  ConditionalDistribution dist;
  bool valid = false;
};

struct CircuitGradients {
  std::vector<double> z;
  std::vector<double> angles;
};

CircuitTape forward(std::span<const double> z, const CircuitLayout& layout,
                    std::span<const double> angles,
                    double acceptance_floor = kAcceptanceFloor);

// Adjoint-method reverse pass: uncomputes the state gate by gate while
// propagating the cotangent, one sweep for all parameters.
CircuitGradients backward(const CircuitTape& tape, const CircuitLayout& layout,
                          std::span<const double> grad_probs);

}  // namespace reqgan::quantum
