#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gatebench/matrix.hpp"

namespace gatebench {

/// Single-qubit Pauli matrix: 0 -> I, 1 -> X, 2 -> Y, 3 -> Z.
inline CMat pauli_matrix(std::size_t i) {
  CMat m(2, 2);
  switch (i) {
    case 0:
      m(0, 0) = 1.0;
      m(1, 1) = 1.0;
      break;
    case 1:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case 2:
      m(0, 1) = cplx(0.0, -1.0);
      m(1, 0) = cplx(0.0, 1.0);
      break;
    case 3:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
    default:
      throw std::invalid_argument("pauli_matrix: index out of range");
  }
  return m;
}

inline const char* pauli_label(std::size_t i) {
  static constexpr std::array<const char*, 4> names{"I", "X", "Y", "Z"};
  if (i >= 4) throw std::invalid_argument("pauli_label: index out of range");
  return names[i];
}

enum class BasisKind { pauli, gate, custom };

/// Orthonormal operator basis on a d-dimensional Hilbert space: d² elements
/// A_k with Tr(A_m† A_n) = δ_mn. Pauli strings carry a 1/√d normalization so
/// that trace-preserving process matrices have unit trace.
class OperatorBasis {
 public:
  /// Normalized Pauli strings in lexicographic order (I, X, Y, Z per qubit;
  /// two qubits: II, IX, IY, IZ, XI, ..., ZZ), each divided by √d.
  static OperatorBasis pauli(std::size_t num_qubits = 2) {
    if (num_qubits != 1 && num_qubits != 2)
      throw std::invalid_argument("OperatorBasis::pauli: unsupported qubit count");
    std::vector<CMat> els;
    std::vector<std::string> labels;
    if (num_qubits == 1) {
      const double inv_sqrt_d = 1.0 / std::sqrt(2.0);
      for (std::size_t i = 0; i < 4; ++i) {
        els.push_back(pauli_matrix(i) * cplx(inv_sqrt_d, 0.0));
        labels.emplace_back(pauli_label(i));
      }
    } else {
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
          els.push_back(kron(pauli_matrix(i), pauli_matrix(j)) * cplx(0.5, 0.0));
          labels.push_back(std::string(pauli_label(i)) + pauli_label(j));
        }
    }
    return OperatorBasis(BasisKind::pauli, std::move(els), std::move(labels), CMat());
  }

  /// Basis adapted to a target unitary: B_k = A_k · U, i.e. a Pauli error
  /// composed after the ideal gate. A perfect implementation of U then has
  /// all its process-matrix weight in element (0,0).
  static OperatorBasis gate_adapted(const CMat& u_ideal, bool error_before = false) {
    if (u_ideal.rows() != 4 || u_ideal.cols() != 4)
      throw std::invalid_argument("OperatorBasis::gate_adapted: expected a 4x4 unitary");
    if (u_ideal.unitarity_error() > 1e-9)
      throw std::invalid_argument("OperatorBasis::gate_adapted: matrix is not unitary");
    OperatorBasis p = pauli(2);
    std::vector<CMat> els;
    std::vector<std::string> labels;
    els.reserve(16);
    labels.reserve(16);
    for (std::size_t k = 0; k < 16; ++k) {
      els.push_back(error_before ? u_ideal * p.element(k) : p.element(k) * u_ideal);
      labels.push_back(p.label(k) + "'");
    }
    return OperatorBasis(BasisKind::gate, std::move(els), std::move(labels), u_ideal);
  }

  /// Arbitrary user-supplied basis; validates completeness and orthonormality.
  static OperatorBasis custom(std::vector<CMat> elements, std::vector<std::string> labels = {},
                              double tol = 1e-9) {
    if (elements.empty()) throw std::invalid_argument("OperatorBasis::custom: no elements");
    const std::size_t d = elements[0].rows();
    if (elements.size() != d * d)
      throw std::invalid_argument("OperatorBasis::custom: need d^2 elements of size dxd");
    for (const CMat& e : elements)
      if (e.rows() != d || e.cols() != d)
        throw std::invalid_argument("OperatorBasis::custom: inconsistent element shapes");
    for (std::size_t m = 0; m < elements.size(); ++m) {
      for (std::size_t n = m; n < elements.size(); ++n) {
        const cplx g = hs_inner(elements[m], elements[n]);
        const double want = m == n ? 1.0 : 0.0;
        if (std::abs(g - want) > tol)
          throw std::invalid_argument("OperatorBasis::custom: elements are not orthonormal");
      }
    }
    if (labels.empty()) {
      labels.resize(elements.size());
      for (std::size_t k = 0; k < labels.size(); ++k) labels[k] = "B" + std::to_string(k);
    } else if (labels.size() != elements.size()) {
      throw std::invalid_argument("OperatorBasis::custom: label count mismatch");
    }
    return OperatorBasis(BasisKind::custom, std::move(elements), std::move(labels), CMat());
  }

  BasisKind kind() const { return kind_; }
  std::size_t size() const { return elements_.size(); }
  std::size_t dim() const { return elements_.empty() ? 0 : elements_[0].rows(); }
  const CMat& element(std::size_t k) const { return elements_.at(k); }
  const std::string& label(std::size_t k) const { return labels_.at(k); }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Generating unitary for a gate-adapted basis.
  const CMat& gate_unitary() const {
    if (kind_ != BasisKind::gate)
      throw std::logic_error("OperatorBasis::gate_unitary: not a gate-adapted basis");
    return gate_unitary_;
  }

 private:
  OperatorBasis(BasisKind kind, std::vector<CMat> els, std::vector<std::string> labels, CMat u)
      : kind_(kind), elements_(std::move(els)), labels_(std::move(labels)),
        gate_unitary_(std::move(u)) {}

  BasisKind kind_;
  std::vector<CMat> elements_;
  std::vector<std::string> labels_;
  CMat gate_unitary_;
};

inline bool same_basis(const OperatorBasis& a, const OperatorBasis& b, double tol = 1e-12) {
  if (a.size() != b.size() || a.dim() != b.dim()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const CMat diff = a.element(k) - b.element(k);
    if (diff.max_abs() > tol) return false;
  }
  return true;
}

/// Transition matrix W with W_mk = Tr(to_m† from_k). For orthonormal bases W
/// is unitary and a process matrix transforms as χ' = W χ W†.
inline CMat change_of_basis(const OperatorBasis& from, const OperatorBasis& to) {
  const std::size_t n = from.size();
  if (to.size() != n || to.dim() != from.dim())
    throw std::invalid_argument("change_of_basis: basis size mismatch");
  CMat w(n, n);
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t k = 0; k < n; ++k) w(m, k) = hs_inner(to.element(m), from.element(k));
  return w;
}

inline OperatorBasis pauli_basis(std::size_t num_qubits) { return OperatorBasis::pauli(num_qubits); }

}  // namespace gatebench
