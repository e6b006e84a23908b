#include "nhtop/models.hpp"

#include <cmath>

namespace nhtop {

namespace {
const Complex I1(0.0, 1.0);
}

const char* to_string(Family f) {
  switch (f) {
    case Family::NH2: return "nh2";
    case Family::NH3: return "nh3";
    case Family::NH4: return "nh4";
    case Family::Hermitian3: return "hermitian3";
  }
  return "?";
}

const char* to_string(Embedding e) {
  switch (e) {
    case Embedding::Loop2D: return "loop2d";
    case Embedding::Sphere2D: return "sphere2d";
    case Embedding::S3: return "s3";
    case Embedding::Loop4D: return "loop4d";
    case Embedding::S4: return "s4";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "nh2") return Family::NH2;
  if (s == "nh3") return Family::NH3;
  if (s == "nh4") return Family::NH4;
  if (s == "hermitian3" || s == "herm3") return Family::Hermitian3;
  throw InvalidConfig("unknown family: " + s);
}

Embedding embedding_from_string(const std::string& s) {
  if (s == "loop2d") return Embedding::Loop2D;
  if (s == "sphere2d") return Embedding::Sphere2D;
  if (s == "s3") return Embedding::S3;
  if (s == "loop4d") return Embedding::Loop4D;
  if (s == "s4") return Embedding::S4;
  throw InvalidConfig("unknown embedding: " + s);
}

void ModelSpec::validate() const {
  if (!(gamma >= 0.0)) throw InvalidConfig("gamma must be >= 0");
  if (r < 0.0 || d < 0.0 || R < 0.0) throw InvalidConfig("geometric parameters must be >= 0");
  const bool ok = (family == Family::NH2 &&
                   (embedding == Embedding::Loop2D || embedding == Embedding::Sphere2D)) ||
                  ((family == Family::NH3 || family == Family::Hermitian3) &&
                   embedding == Embedding::S3) ||
                  (family == Family::NH4 &&
                   (embedding == Embedding::Loop4D || embedding == Embedding::S4));
  if (!ok)
    throw IncompatibleEmbedding(std::string("embedding ") + to_string(embedding) +
                                " is not compatible with family " + to_string(family));
}

int ModelSpec::matrix_dim() const {
  switch (family) {
    case Family::NH2: return 2;
    case Family::NH3:
    case Family::Hermitian3: return 3;
    case Family::NH4: return 4;
  }
  return 0;
}

int ModelSpec::embedding_dim() const {
  switch (embedding) {
    case Embedding::Loop2D:
    case Embedding::Loop4D: return 1;
    case Embedding::Sphere2D: return 2;
    case Embedding::S3: return 3;
    case Embedding::S4: return 4;
  }
  return 0;
}

ModelSpec make_spec(Family f, Embedding e, double gamma, double r, double d, double R) {
  ModelSpec s;
  s.family = f;
  s.embedding = e;
  s.gamma = gamma;
  s.r = r;
  s.d = d;
  s.R = R;
  s.validate();
  return s;
}

std::array<Matrix, 3> pauli_basis() {
  Matrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, -I1, I1, 0;
  sz << 1, 0, 0, -1;
  return {sx, sy, sz};
}

std::array<Matrix, 8> gell_mann_basis() {
  auto Z = [] { return Matrix(Matrix::Zero(3, 3)); };
  std::array<Matrix, 8> L{Z(), Z(), Z(), Z(), Z(), Z(), Z(), Z()};
  L[0](0, 1) = L[0](1, 0) = 1.0;
  L[1](0, 1) = -I1; L[1](1, 0) = I1;
  L[2](0, 0) = 1.0; L[2](1, 1) = -1.0;
  L[3](0, 2) = L[3](2, 0) = 1.0;
  L[4](0, 2) = -I1; L[4](2, 0) = I1;
  L[5](1, 2) = L[5](2, 1) = 1.0;
  L[6](1, 2) = -I1; L[6](2, 1) = I1;
  const double s3 = 1.0 / std::sqrt(3.0);
  L[7](0, 0) = s3; L[7](1, 1) = s3; L[7](2, 2) = -2.0 * s3;
  return L;
}

std::array<Matrix, 5> dirac_basis() {
  const auto s = pauli_basis();
  const Matrix id2 = Matrix::Identity(2, 2);
  auto kron = [](const Matrix& A, const Matrix& B) {
    Matrix K(4, 4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        K.block(2 * i, 2 * j, 2, 2) = A(i, j) * B;
    return K;
  };
  // Representation fixed by the listed closed-form eigenvectors of the
  // four-level model (alpha/beta pairs); see analytic_eigensystem.
  return {kron(s[1], s[1]), kron(id2, s[0]), Matrix(-kron(s[2], s[1])), kron(id2, s[2]),
          kron(s[0], s[1])};
}

std::vector<double> embed(const ModelSpec& spec, const ParamPoint& p) {
  spec.validate();
  if (p.dim != spec.embedding_dim())
    throw IncompatibleEmbedding("parameter point has wrong dimension for embedding");
  const double g = 1.0;  // r, d, R carry the energy unit (gamma at default scale)
  switch (spec.embedding) {
    case Embedding::Loop2D: {
      const double th = p[0];
      return {g * (spec.r * std::sin(th) + spec.d), 0.0, g * spec.r * std::cos(th)};
    }
    case Embedding::Sphere2D: {
      const double th = p[0], ph = p[1];
      return {g * spec.R * std::sin(th) * std::cos(ph), g * spec.R * std::sin(th) * std::sin(ph),
              g * spec.R * std::cos(th)};
    }
    case Embedding::S3: {
      const double al = p[0], p1 = p[1], p2 = p[2];
      const double O1 = g * spec.R * std::cos(al), O2 = g * spec.R * std::sin(al);
      return {O1 * std::cos(p1), O1 * std::sin(p1), O2 * std::cos(p2), O2 * std::sin(p2)};
    }
    case Embedding::Loop4D: {
      const double th = p[0];
      const double w = g * (spec.r * std::sin(th) + spec.d);
      return {w / std::sqrt(2.0), w / std::sqrt(2.0), 0.0, g * spec.r * std::cos(th), 0.0};
    }
    case Embedding::S4: {
      const double t1 = p[0], t2 = p[1], p1 = p[2], p2 = p[3];
      const double RR = g * spec.R;
      return {RR * std::sin(t1) * std::sin(t2) * std::cos(p2),
              RR * std::sin(t1) * std::cos(t2) * std::cos(p1),
              RR * std::sin(t1) * std::cos(t2) * std::sin(p1), RR * std::cos(t1),
              RR * std::sin(t1) * std::sin(t2) * std::sin(p2)};
    }
  }
  throw IncompatibleEmbedding("unhandled embedding");
}

Matrix hamiltonian(const ModelSpec& spec, const ParamPoint& p) {
  const std::vector<double> q = embed(spec, p);
  switch (spec.family) {
    case Family::NH2: {
      const auto s = pauli_basis();
      Matrix H = q[0] * s[0] + q[1] * s[1] + q[2] * s[2];
      H += I1 * spec.gamma * s[2];
      return H;
    }
    case Family::NH3:
    case Family::Hermitian3: {
      const auto L = gell_mann_basis();
      Matrix H = q[0] * L[0] + q[1] * L[1] + q[2] * L[5] + q[3] * L[6];
      if (spec.family == Family::NH3) H += I1 * spec.gamma * L[7];
      return H;
    }
    case Family::NH4: {
      const auto G = dirac_basis();
      Matrix H = Matrix::Zero(4, 4);
      for (int m = 0; m < 5; ++m) H += q[m] * G[m];
      H += I1 * spec.gamma * G[3];
      return H;
    }
  }
  throw IncompatibleEmbedding("unhandled family");
}

namespace {

// Two-level closed form: H = [[az, b], [bc, -az]] with az = q_z + i gamma,
// b = q_x - i q_y, bc = q_x + i q_y. Pair n: |u_n> = (b, E_n - az)/N_n,
// <u_n^L| = (bc, E_n - az)/N_n, N_n^2 = 2 E_n (E_n - az).
EigenSystem analytic_two_level(const ModelSpec& spec, const ParamPoint& p) {
  const std::vector<double> q = embed(spec, p);
  const Complex az(q[2], spec.gamma);
  const Complex b(q[0], -q[1]);
  const Complex bc(q[0], q[1]);
  const Complex E2 = b * bc + az * az;
  Complex E = std::sqrt(E2);

  EigenSystem es;
  es.energies.resize(2);
  es.right.resize(2, 2);
  es.left.resize(2, 2);
  es.norms.resize(2);
  // sort ascending by (Re, Im) as the numeric solver does
  std::array<Complex, 2> evs{-E, E};
  if (evs[0].real() > evs[1].real() ||
      (evs[0].real() == evs[1].real() && evs[0].imag() > evs[1].imag()))
    std::swap(evs[0], evs[1]);
  for (int n = 0; n < 2; ++n) {
    const Complex En = evs[n];
    Vector u(2), w(2);
    u << b, En - az;
    w << bc, En - az;
    const Complex N2 = 2.0 * En * (En - az);
    if (std::abs(N2) < 1e-14 * (std::abs(E2) + 1.0))
      throw NoClosedForm("two-level closed form degenerate at a coordinate pole");
    const Complex N = std::sqrt(N2);
    es.energies[n] = En;
    es.right.col(n) = u / N;
    es.left.row(n) = (w / N).transpose();
    es.norms[n] = N;
  }
  es.groups = {{0}, {1}};
  es.min_gap = std::abs(es.energies[1] - es.energies[0]);
  return es;
}

// Four-level closed form, valid for any control vector with a = q2 + i q3,
// b = q1 + i q5, z = q4 + i gamma:
//   |u_n^alpha> = (0, b, E_n + z, a)          / N_n
//   |u_n^beta>  = (E_n + z, conj(a), 0, -conj(b)) / N_n
//   <u_n^Lalpha| = (0, conj(b), E_n + z, conj(a)) / N_n
//   <u_n^Lbeta|  = (E_n + z, a, 0, -b)        / N_n
// with E_n = +-sqrt(|a|^2 + |b|^2 + z^2) and N_n^2 = 2 E_n (E_n + z).
EigenSystem analytic_four_level(const ModelSpec& spec, const ParamPoint& p) {
  const std::vector<double> q = embed(spec, p);
  const Complex a(q[1], q[2]);
  const Complex b(q[0], q[4]);
  const Complex z(q[3], spec.gamma);
  const Complex E2 = std::norm(a) + std::norm(b) + z * z;
  const Complex E = std::sqrt(E2);

  std::array<Complex, 2> evs{-E, E};
  if (evs[0].real() > evs[1].real() ||
      (evs[0].real() == evs[1].real() && evs[0].imag() > evs[1].imag()))
    std::swap(evs[0], evs[1]);

  EigenSystem es;
  es.energies.resize(4);
  es.right.resize(4, 4);
  es.left.resize(4, 4);
  es.norms.resize(4);
  for (int band = 0; band < 2; ++band) {
    const Complex En = evs[band];
    const Complex N2 = 2.0 * En * (En + z);
    if (std::abs(N2) < 1e-14 * (std::abs(E2) + 1.0))
      throw NoClosedForm("four-level closed form degenerate at a coordinate pole");
    const Complex N = std::sqrt(N2);
    Vector ua(4), ub(4), wa(4), wb(4);
    ua << 0.0, b, En + z, a;
    ub << En + z, std::conj(a), 0.0, -std::conj(b);
    wa << 0.0, std::conj(b), En + z, std::conj(a);
    wb << En + z, a, 0.0, -b;
    const int ca = 2 * band, cb = 2 * band + 1;
    es.energies[ca] = En;
    es.energies[cb] = En;
    es.right.col(ca) = ua / N;
    es.right.col(cb) = ub / N;
    es.left.row(ca) = (wa / N).transpose();
    es.left.row(cb) = (wb / N).transpose();
    es.norms[ca] = N;
    es.norms[cb] = N;
  }
  es.groups = {{0, 1}, {2, 3}};
  es.min_gap = std::abs(evs[1] - evs[0]);
  return es;
}

}  // namespace

EigenSystem analytic_eigensystem(const ModelSpec& spec, const ParamPoint& p) {
  spec.validate();
  if (spec.family == Family::NH2 && spec.embedding == Embedding::Sphere2D)
    return analytic_two_level(spec, p);
  if (spec.family == Family::NH4) return analytic_four_level(spec, p);
  throw NoClosedForm(std::string("no closed-form eigensystem for ") + to_string(spec.family) +
                     "/" + to_string(spec.embedding));
}

double ModelSpec::energy_scale() const {
  return std::max({gamma, r + d, R, 1e-30});
}

EigenSystem model_eigensystem(const ModelSpec& spec, const ParamPoint& p) {
  return eig_biorthogonal(hamiltonian(spec, p),
                          defaults::degeneracy_tol_scale * spec.energy_scale());
}

}  // namespace nhtop
