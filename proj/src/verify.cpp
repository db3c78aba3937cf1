// Copyright 2026 The qtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "qtraj/appendix_lab.hpp"
#include "qtraj/cli.hpp"
#include "qtraj/oracle.hpp"

namespace qtraj {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Row {
    std::string name;
    double value;
    double limit;
    bool pass;
    std::string note;
};

class Table {
  public:
    void add(const std::string &name, double value, double limit, bool pass, const std::string &note = "") {
        rows_.push_back({name, value, limit, pass, note});
    }
    // Passes when value <= limit.
    void below(const std::string &name, double value, double limit, const std::string &note = "") {
        add(name, value, limit, value <= limit, note);
    }
    bool all_pass() const {
        for (const auto &r : rows_) {
            if (!r.pass) {
                return false;
            }
        }
        return !rows_.empty();
    }
    void print(std::ostream &out) const {
        std::size_t w = 10;
        for (const auto &r : rows_) {
            w = std::max(w, r.name.size());
        }
        out << std::left << std::setw(static_cast<int>(w) + 2) << "check" << std::setw(14) << "value"
            << std::setw(12) << "limit" << "status\n";
        for (const auto &r : rows_) {
            out << std::left << std::setw(static_cast<int>(w) + 2) << r.name << std::setw(14) << fmt(r.value)
                << std::setw(12) << fmt(r.limit) << (r.pass ? "PASS" : "FAIL");
            if (!r.note.empty()) {
                out << "  " << r.note;
            }
            out << "\n";
        }
    }

  private:
    static std::string fmt(double v) {
        if (std::isnan(v)) {
            return "-";
        }
        std::ostringstream os;
        os << std::setprecision(4) << v;
        return os.str();
    }
    std::vector<Row> rows_;
};

SystemModel reference_system() {
    return SystemModel::qubit(sigma_minus() + 0.3 * sigma_z(), 1.0);
}

SchemeConfig reference_scheme(SchemeKind kind) {
    SchemeConfig s;
    s.kind = kind;
    s.phi = 0.3;
    switch (kind) {
        case SchemeKind::CoherentPhotocount:
            s.bath.alpha = Complex(0.8, 0.3);
            s.phi = 0;
            break;
        case SchemeKind::ThermalHomodyne:
            s.bath.n_th = 0.5;
            break;
        case SchemeKind::SqueezedThermalHomodyne:
            s.bath.r = std::asinh(1.0);
            s.bath.mu = kPi / 6;
            s.bath.n_th = 0.5;
            break;
        case SchemeKind::InefficientHomodyne:
            s.eta = 0.5;
            break;
        case SchemeKind::PoissonStrong:
            s.lambda = 1.0;
            break;
        default:
            break;
    }
    return s;
}

std::vector<SchemeKind> constructor_kinds() {
    std::vector<SchemeKind> out;
    for (SchemeKind k : all_scheme_kinds()) {
        if (k != SchemeKind::CustomCircuit) {
            out.push_back(k);
        }
    }
    return out;
}

void suite_povm(Table &t) {
    const std::vector<double> dts = {1e-2, 1e-3, 1e-4};
    SystemModel sys = reference_system();
    for (SchemeKind k : constructor_kinds()) {
        std::vector<double> defects;
        for (double d : dts) {
            double v = build_kraus(sys, reference_scheme(k), d).completeness_defect();
            defects.push_back(v);
            t.below(scheme_name(k) + " dtau=" + format_double(d), v / (d * d), 10.0, "defect/dtau^2");
        }
        double worst = *std::max_element(defects.begin(), defects.end());
        if (worst <= 1e-13) {
            t.add(scheme_name(k) + " exponent", std::nan(""), std::nan(""), true, "complete to rounding");
        } else {
            double e = fit_log_slope(dts, defects);
            t.add(scheme_name(k) + " exponent", e, 2.0, std::abs(e - 2.0) <= 0.1);
        }
    }
}

void suite_unconditional(Table &t) {
    SystemModel sys = reference_system();
    DensityMatrix rho = DensityMatrix::pure(ket_phi(1, 0.4));
    for (SchemeKind k : constructor_kinds()) {
        SchemeConfig s = reference_scheme(k);
        SystemModel use = sys;
        if (k == SchemeKind::PoissonStrong) {
            use.c = sigma_z();
        }
        ConsistencyReport r = unconditional_consistency(use, s, rho, 1e-2);
        if (r.exact) {
            t.below(scheme_name(k) + " residual", r.max_residual(), 1e-13, "exact step");
        } else {
            t.add(scheme_name(k) + " exponent", r.exponent, 2.0, std::abs(r.exponent - 2.0) <= 0.1);
        }
    }
    SystemModel rabi = SystemModel::qubit(sigma_minus(), 1.0, sigma_x());
    for (double d : {1e-2, 1e-3}) {
        DensityMatrix a = unconditional_step(rho, build_kraus(rabi, reference_scheme(SchemeKind::VacuumPhotocount), d), rabi);
        SchemeConfig hom = reference_scheme(SchemeKind::VacuumHomodyne);
        DensityMatrix b = unconditional_step(rho, build_kraus(rabi, hom, d), rabi);
        DensityMatrix c = unconditional_step(rho, build_kraus(rabi, reference_scheme(SchemeKind::VacuumHeterodyne), d), rabi);
        double diff = std::max((a.matrix() - b.matrix()).cwiseAbs().maxCoeff(), (a.matrix() - c.matrix()).cwiseAbs().maxCoeff());
        t.below("vacuum unravelings dt=" + format_double(d), diff, 1e-13);
    }
}

void suite_heterodyne(Table &t) {
    SystemModel sys = reference_system();
    for (double d : {1e-2, 1e-3, 1e-4}) {
        t.below("circuit vs analytic dtau=" + format_double(d), heterodyne_circuit_equivalence(sys, d), 1e-13);
    }
    Matrix bs = beamsplitter(Complex(0, -kPi / 4));
    t.below("beamsplitter explicit", (bs - beamsplitter_explicit()).cwiseAbs().maxCoeff(), 1e-13);
    t.below("beamsplitter factored", (bs - beamsplitter_factored()).cwiseAbs().maxCoeff(), 1e-13);
}

void stats_row(Table &t, const std::string &name, const BathStats &s, Complex alpha, double N, Complex M) {
    double err = std::max({std::abs(s.alpha - alpha), std::abs(s.N - N), std::abs(s.M - M), std::abs(s.commutator - 1.0)});
    t.below(name, err, 1e-12);
}

void suite_bath_stats(Table &t) {
    const double d = 1e-3;
    auto scheme_row = [&](const std::string &name, const SchemeConfig &s) {
        BathModel m = scheme_bath_model(s, d);
        Complex alpha = s.kind == SchemeKind::CoherentPhotocount || s.kind == SchemeKind::SqueezedThermalHomodyne
                            ? s.bath.alpha
                            : Complex(0, 0);
        double N = s.bath.N();
        Complex M = s.bath.M();
        stats_row(t, name, bath_stats(m.a, m.probe_density, d), alpha, N, M);
    };
    SchemeConfig s;
    s.kind = SchemeKind::VacuumHomodyne;
    scheme_row("vacuum", s);
    s = SchemeConfig();
    s.kind = SchemeKind::CoherentPhotocount;
    s.bath.alpha = 1.0;
    scheme_row("coherent alpha=1", s);
    for (double n : {0.5, 1.0}) {
        s = SchemeConfig();
        s.kind = SchemeKind::ThermalHomodyne;
        s.bath.n_th = n;
        scheme_row("thermal n_th=" + format_double(n), s);
    }
    for (double mu : {0.0, kPi / 6}) {
        for (double n : {0.0, 0.5}) {
            s = SchemeConfig();
            s.kind = SchemeKind::SqueezedThermalHomodyne;
            s.bath.r = std::asinh(1.0);
            s.bath.mu = mu;
            s.bath.n_th = n;
            scheme_row("squeezed sinh(r)=1 mu=" + format_double(mu) + " n_th=" + format_double(n), s);
        }
    }
    std::vector<std::pair<double, Complex>> nm = {{1.0, std::sqrt(2.0)}, {1.0, 1.0}, {0.5, Complex(0.2, 0.3)}};
    for (auto [N, M] : nm) {
        std::string tag = " N=" + format_double(N) + " M=" + format_double(M.real()) + (M.imag() != 0 ? "+" + format_double(M.imag()) + "i" : "");
        for (const ProbeModel &m : {araki_woods_model(N, M), two_qubit_squeezed_model(N, M), qutrit_model(N, M)}) {
            stats_row(t, m.name + tag, bath_stats(m.a_op, m.probe_density(), d), 0.0, N, M);
        }
    }
}

void suite_appendix_a(Table &t, std::uint64_t seed, int draws) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;
    for (int i = 0; i < draws; i++) {
        Matrix c(3, 3), h(3, 3);
        for (int r = 0; r < 3; r++) {
            for (int k = 0; k < 3; k++) {
                c(r, k) = Complex(normal(gen), normal(gen));
                h(r, k) = Complex(normal(gen), normal(gen));
            }
        }
        Matrix rho = 0.5 * (h + h.adjoint());
        double r = unit(gen);
        double mu = 2 * kPi * unit(gen);
        double n_th = unit(gen);
        double worst = 0;
        std::string which;
        for (const auto &res : appendix_a_identities(c, rho, r, mu, n_th)) {
            if (res.value >= worst) {
                worst = res.value;
                which = res.name;
            }
        }
        std::ostringstream name;
        name << "draw " << i << " r=" << std::setprecision(3) << r << " mu=" << mu << " n_th=" << n_th;
        t.below(name.str(), worst, 1e-12, "worst: " + which);
    }
}

int suite_appendix_b(const json &opt, std::ostream &out, std::ostream &err) {
    std::string model = opt.value("model", std::string("araki-woods"));
    double N = opt.value("n", 1.0);
    Complex M(opt.value("m_re", 0.0), opt.value("m_im", 0.0));
    ProbeModel m;
    try {
        if (model == "araki-woods") {
            m = araki_woods_model(N, M);
        } else if (model == "two-qubit") {
            m = two_qubit_squeezed_model(N, M);
        } else if (model == "qutrit") {
            m = qutrit_model(N, M);
        } else {
            err << "unknown model '" << model << "' (expected araki-woods, two-qubit or qutrit)\n";
            return 2;
        }
    } catch (const Error &e) {
        err << "invalid model parameters: " << e.what() << "\n";
        return 2;
    }
    out << "model " << m.name << "  N=" << N << "  M=" << M.real() << (M.imag() < 0 ? "" : "+") << M.imag() << "i\n";
    BathStats s = bath_stats(m.a_op, m.probe_density(), 1e-3);
    Table stats;
    stats_row(stats, "bath statistics", s, 0.0, N, M);
    stats.print(out);
    if (!m.supports_homodyne) {
        out << "conditional constraints: not applicable (stats-only model)\n";
        return stats.all_pass() ? 0 : 1;
    }
    ConstraintReport rep = check_model(m, N, M);
    out << "phi_plus=" << rep.phi_plus << "  phi_minus=" << rep.phi_minus << "\n";
    Table t;
    for (const auto &r : rep.residuals) {
        t.add(r.name, r.value, rep.threshold, r.value < rep.threshold);
    }
    t.print(out);
    out << "gamma residuals (reported only):";
    for (const auto &r : rep.gamma_residuals) {
        out << " " << r.name << "=" << r.value;
    }
    out << "\nspectrum:";
    for (double v : rep.spectrum) {
        out << " " << v;
    }
    out << "\nmeasured subspaces degenerate: " << (rep.degenerate ? "yes" : "no") << "\n";
    if (model == "two-qubit") {
        out << "naive zero-subspace pairing: signal strength relative to the squeezed-bath value = "
            << two_qubit_naive_pairing_strength(N, M) << "\n";
    }
    out << "verdict: " << (rep.pass && stats.all_pass() ? "PASS" : "FAIL") << "\n";
    return rep.pass && stats.all_pass() ? 0 : 1;
}

}  // namespace

const std::vector<std::string> &verify_suites() {
    static const std::vector<std::string> s = {"povm", "unconditional", "heterodyne-circuit", "bath-stats", "appendix-a", "appendix-b"};
    return s;
}

int cmd_verify(const std::string &suite, const json &options, std::ostream &out, std::ostream &err) {
    try {
        if (suite == "appendix-b") {
            return suite_appendix_b(options, out, err);
        }
        Table t;
        if (suite == "povm") {
            suite_povm(t);
        } else if (suite == "unconditional") {
            suite_unconditional(t);
        } else if (suite == "heterodyne-circuit") {
            suite_heterodyne(t);
        } else if (suite == "bath-stats") {
            suite_bath_stats(t);
        } else if (suite == "appendix-a") {
            suite_appendix_a(t, options.value("seed", std::uint64_t{2024}), options.value("draws", 20));
        } else {
            err << "unknown suite '" << suite << "'\n";
            return 2;
        }
        out << "suite " << suite << "\n";
        t.print(out);
        bool ok = t.all_pass();
        out << (ok ? "all checks passed" : "some checks FAILED") << "\n";
        return ok ? 0 : 1;
    } catch (const std::exception &e) {
        err << "verify " << suite << " aborted: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace qtraj
