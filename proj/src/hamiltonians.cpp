#include "qhbm/hamiltonians.hpp"

#include <complex>
#include <json.hpp>
#include <stdexcept>

#include "qhbm/rng.hpp"

namespace qhbm {

namespace {

using Complex = std::complex<double>;

void check_term(int n_qubits, const PauliTerm& term) {
  for (const auto& [q, p] : term.paulis) {
    if (q < 0 || q >= n_qubits) {
      throw std::invalid_argument("Pauli term references qubit " +
                                  std::to_string(q) + " outside 0.." +
                                  std::to_string(n_qubits - 1));
    }
    if (p != 'X' && p != 'Y' && p != 'Z') {
      throw std::invalid_argument(std::string("unknown Pauli letter '") + p +
                                  "' (expected X, Y or Z)");
    }
  }
}

// Action of a Pauli string on basis ket |k>: P|k> = phase(k) |k ^ flip_mask>.
// Qubit q occupies bit position n-1-q (qubit 0 = MSB).
struct PauliAction {
  Eigen::Index flip_mask = 0;
  std::vector<std::pair<Eigen::Index, char>> factors;  // (bit mask, letter)

  Complex phase(Eigen::Index k) const {
    Complex ph(1.0, 0.0);
    for (const auto& [mask, p] : factors) {
      bool bit = (k & mask) != 0;
      switch (p) {
        case 'X':
          break;
        case 'Y':
          ph *= bit ? Complex(0.0, -1.0) : Complex(0.0, 1.0);
          break;
        case 'Z':
          if (bit) ph = -ph;
          break;
      }
    }
    return ph;
  }
};

PauliAction make_action(int n_qubits, const PauliTerm& term) {
  PauliAction action;
  for (const auto& [q, p] : term.paulis) {
    Eigen::Index mask = Eigen::Index{1} << (n_qubits - 1 - q);
    if (p != 'Z') action.flip_mask |= mask;
    action.factors.emplace_back(mask, p);
  }
  return action;
}

}  // namespace

PauliSumHamiltonian make_pauli_sum(int n_qubits,
                                   std::vector<PauliTerm> terms) {
  if (n_qubits < 1) {
    throw std::invalid_argument("Hamiltonian needs at least one qubit");
  }
  std::map<std::map<int, char>, double> merged;
  for (const auto& term : terms) {
    check_term(n_qubits, term);
    merged[term.paulis] += term.coeff;
  }
  PauliSumHamiltonian h{n_qubits, {}};
  for (auto& [paulis, coeff] : merged) {
    if (coeff != 0.0) h.terms.push_back(PauliTerm{coeff, paulis});
  }
  return h;
}

PauliSumHamiltonian heisenberg_2d(int nx, int ny, double jh, double jv) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("heisenberg_2d requires nx, ny >= 1");
  }
  auto site = [nx](int x, int y) { return y * nx + x; };
  std::vector<PauliTerm> terms;
  auto add_bond = [&terms](int a, int b, double coupling) {
    for (char p : {'X', 'Y', 'Z'}) {
      // S = sigma/2, so J S.S contributes J/4 per Pauli pair.
      terms.push_back(PauliTerm{coupling / 4.0, {{a, p}, {b, p}}});
    }
  };
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x + 1 < nx; ++x) add_bond(site(x, y), site(x + 1, y), jh);
  }
  for (int y = 0; y + 1 < ny; ++y) {
    for (int x = 0; x < nx; ++x) add_bond(site(x, y), site(x, y + 1), jv);
  }
  return make_pauli_sum(nx * ny, std::move(terms));
}

PauliSumHamiltonian heisenberg_1d_fields(int n, double j, double hx,
                                         double hz) {
  if (n < 2) {
    throw std::invalid_argument("heisenberg_1d_fields requires n >= 2");
  }
  std::vector<PauliTerm> terms;
  for (int q = 0; q + 1 < n; ++q) {
    for (char p : {'X', 'Y', 'Z'}) {
      // Coupling term is -j S.S with S = sigma/2.
      terms.push_back(PauliTerm{-j / 4.0, {{q, p}, {q + 1, p}}});
    }
  }
  for (int q = 0; q < n; ++q) {
    if (hx != 0.0) terms.push_back(PauliTerm{hx / 2.0, {{q, 'X'}}});
    if (hz != 0.0) terms.push_back(PauliTerm{hz / 2.0, {{q, 'Z'}}});
  }
  return make_pauli_sum(n, std::move(terms));
}

PauliSumHamiltonian random_coupling_chain(int n, std::uint64_t seed) {
  if (n < 2) {
    throw std::invalid_argument("random_coupling_chain requires n >= 2");
  }
  Rng rng(seed);
  std::vector<PauliTerm> terms;
  for (int q = 0; q + 1 < n; ++q) {
    for (char p : {'X', 'Y', 'Z'}) {
      terms.push_back(PauliTerm{uniform_in(rng, -1.0, 1.0), {{q, p}, {q + 1, p}}});
    }
  }
  for (int q = 0; q < n; ++q) {
    for (char p : {'X', 'Y', 'Z'}) {
      terms.push_back(PauliTerm{uniform_in(rng, -1.0, 1.0), {{q, p}}});
    }
  }
  return make_pauli_sum(n, std::move(terms));
}

Eigen::MatrixXcd dense_matrix(const PauliSumHamiltonian& h) {
  const Eigen::Index dim = Eigen::Index{1} << h.n_qubits;
  Eigen::MatrixXcd dense = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& term : h.terms) {
    PauliAction action = make_action(h.n_qubits, term);
    for (Eigen::Index k = 0; k < dim; ++k) {
      dense(k ^ action.flip_mask, k) += term.coeff * action.phase(k);
    }
  }
  return dense;
}

double expectation(const PauliSumHamiltonian& h, const DensityMatrix& rho) {
  if (rho.dim() != (Eigen::Index{1} << h.n_qubits)) {
    throw std::invalid_argument("expectation: dimension mismatch");
  }
  Complex total(0.0, 0.0);
  for (const auto& term : h.terms) {
    PauliAction action = make_action(h.n_qubits, term);
    Complex tr(0.0, 0.0);
    for (Eigen::Index k = 0; k < rho.dim(); ++k) {
      // tr(P rho) = sum_k phase(k) rho(k, k ^ flip).
      tr += action.phase(k) * rho.data(k, k ^ action.flip_mask);
    }
    total += term.coeff * tr;
  }
  return total.real();
}

std::string pauli_sum_to_json(const PauliSumHamiltonian& h) {
  nlohmann::json doc;
  doc["n_qubits"] = h.n_qubits;
  doc["terms"] = nlohmann::json::array();
  for (const auto& term : h.terms) {
    nlohmann::json entry;
    entry["coeff"] = term.coeff;
    entry["paulis"] = nlohmann::json::object();
    for (const auto& [q, p] : term.paulis) {
      entry["paulis"][std::to_string(q)] = std::string(1, p);
    }
    doc["terms"].push_back(std::move(entry));
  }
  return doc.dump();
}

PauliSumHamiltonian pauli_sum_from_json(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  int n_qubits = doc.at("n_qubits").get<int>();
  std::vector<PauliTerm> terms;
  for (const auto& entry : doc.at("terms")) {
    PauliTerm term;
    term.coeff = entry.at("coeff").get<double>();
    for (const auto& [key, value] : entry.at("paulis").items()) {
      std::string letter = value.get<std::string>();
      if (letter.size() != 1) {
        throw std::invalid_argument("Pauli letter must be a single character");
      }
      term.paulis[std::stoi(key)] = letter[0];
    }
    terms.push_back(std::move(term));
  }
  return make_pauli_sum(n_qubits, std::move(terms));
}

}  // namespace qhbm
