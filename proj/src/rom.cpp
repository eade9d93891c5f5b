#include "grb/rom.hpp"

#include <Eigen/SparseCholesky>
#include <chrono>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "grb/crc64.hpp"

namespace grb {

using json = nlohmann::json;

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

ReducedModel::ReducedModel(std::vector<ThetaDescriptor> theta,
                           std::vector<Eigen::MatrixXd> a1, Eigen::VectorXd l1, Eigen::VectorXd lO1,
                           std::vector<Eigen::MatrixXd> a2, Eigen::VectorXd l2, Eigen::VectorXd lO2,
                           Eigen::MatrixXd b1, Eigen::MatrixXd b2, Eigen::MatrixXd b12,
                           ParamBox box, RomMetadata meta,
                           Eigen::MatrixXd phi, Eigen::MatrixXd psi)
    : theta_(std::move(theta)),
      a1_(std::move(a1)),
      a2_(std::move(a2)),
      l1_(std::move(l1)),
      lO1_(std::move(lO1)),
      l2_(std::move(l2)),
      lO2_(std::move(lO2)),
      b1_(std::move(b1)),
      b2_(std::move(b2)),
      b12_(std::move(b12)),
      box_(std::move(box)),
      meta_(std::move(meta)),
      phi_(std::move(phi)),
      psi_(std::move(psi)) {
    if (theta_.empty() || theta_.size() != a1_.size() || a1_.size() != a2_.size()) {
        throw InvalidInputError("reduced model: theta/operator count mismatch");
    }
    const Eigen::Index m1 = l1_.size(), m2 = l2_.size();
    for (const auto& A : a1_) {
        if (A.rows() != m1 || A.cols() != m1) throw DimensionError("reduced model: level-1 block");
    }
    for (const auto& A : a2_) {
        if (A.rows() != m2 || A.cols() != m2) throw DimensionError("reduced model: level-2 block");
    }
    if (lO1_.size() != m1 || lO2_.size() != m2 || b1_.rows() != m1 || b1_.cols() != m1 ||
        b2_.rows() != m2 || b2_.cols() != m2 || b12_.rows() != m1 || b12_.cols() != m2) {
        throw DimensionError("reduced model: inconsistent block dimensions");
    }
}

OnlineResult ReducedModel::online_solve(const Eigen::VectorXd& mu, int level) const {
    if (level != 1 && level != 2) throw InvalidInputError("online_solve: level must be 1 or 2");
    if (!box_.contains(mu)) {
        throw OutOfRangeError("online_solve: parameter outside stored domain",
                              mu.size() > 0 ? mu(0) : 0.0);
    }
    const double t0 = now_seconds();
    const auto& ops = level == 1 ? a1_ : a2_;
    const auto& l = level == 1 ? l1_ : l2_;
    const auto& lO = level == 1 ? lO1_ : lO2_;

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(l.size(), l.size());
    for (size_t q = 0; q < ops.size(); ++q) {
        A += theta_[q].eval(mu) * ops[q];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rcond() < 1e-14) {
        throw SolverError("online_solve: reduced system singular to tolerance at mu(0) = " +
                          std::to_string(mu(0)));
    }
    OnlineResult result;
    result.level = level;
    result.coeffs = lu.solve(l);
    result.s = lO.dot(result.coeffs);
    result.seconds = now_seconds() - t0;
    return result;
}

ErrorEstimates ReducedModel::estimate_errors(const Eigen::VectorXd& mu) const {
    ErrorEstimates est;
    est.level1 = online_solve(mu, 1);
    est.level2 = online_solve(mu, 2);
    const Eigen::VectorXd& alpha = est.level1.coeffs;
    const Eigen::VectorXd& beta = est.level2.coeffs;

    est.output_est = std::abs(est.level2.s - est.level1.s);
    const double u2_sq = beta.dot(b2_ * beta);
    const double quad = alpha.dot(b1_ * alpha) + u2_sq - 2.0 * alpha.dot(b12_ * beta);
    est.solution_est = std::sqrt(std::max(0.0, quad));

    est.output_rel = est.output_est / std::max(std::abs(est.level2.s), 1e-14);
    est.solution_rel = est.solution_est / std::max(std::sqrt(std::max(0.0, u2_sq)), 1e-14);
    return est;
}

Eigen::VectorXd ReducedModel::reconstruct(const OnlineResult& result) const {
    if (!has_bases()) {
        throw UnavailableError("reconstruct: model was saved without bases");
    }
    const Eigen::MatrixXd& basis = result.level == 1 ? phi_ : psi_;
    if (result.coeffs.size() != basis.cols()) {
        throw DimensionError("reconstruct: coefficient length does not match basis");
    }
    return basis * result.coeffs;
}

namespace {

std::vector<Eigen::MatrixXd> congruence(const std::vector<Eigen::SparseMatrix<double>>& ops,
                                        const Eigen::MatrixXd& left,
                                        const Eigen::MatrixXd& right) {
    std::vector<Eigen::MatrixXd> reduced;
    reduced.reserve(ops.size());
    for (const auto& op : ops) {
        reduced.push_back(left.transpose() * (op * right));
    }
    return reduced;
}

double output_dual_norm(const FullOrderModel& fom) {
    const auto& space = fom.space();
    const Eigen::VectorXd& lO = fom.affine().output;
    if (space.is_diagonal()) {
        return std::sqrt(lO.dot((lO.array() / space.weights().array()).matrix()));
    }
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(space.matrix());
    if (ldlt.info() != Eigen::Success) {
        throw SolverError("offline: X-matrix factorization failed for dual norm");
    }
    return std::sqrt(std::max(0.0, lO.dot(ldlt.solve(lO))));
}

}  // namespace

ReducedModel build_reduced_from_bases(const FullOrderModel& fom, const ParamSample& sample,
                                      const Basis& phi, const Basis& psi,
                                      const std::string& activation_name, int L,
                                      bool store_bases, bool m1_capped, bool m2_capped) {
    const auto& space = fom.space();
    const auto& affine = fom.affine();
    const Eigen::MatrixXd& P = phi.modes;
    const Eigen::MatrixXd& S = psi.modes;

    const Eigen::MatrixXd XP = space.apply(P);
    const Eigen::MatrixXd XS = space.apply(S);

    RomMetadata meta;
    meta.activation = activation_name;
    meta.n = sample.size();
    meta.l = L;
    meta.fom_label = fom.label();
    meta.output_dual_norm = output_dual_norm(fom);
    meta.store_bases = store_bases;
    meta.full_dim = space.dim();
    meta.sample = sample.points();
    meta.m1_capped = m1_capped;
    meta.m2_capped = m2_capped;

    return ReducedModel(affine.theta,
                        congruence(affine.ops, P, P), P.transpose() * affine.load,
                        P.transpose() * affine.output,
                        congruence(affine.ops, S, S), S.transpose() * affine.load,
                        S.transpose() * affine.output,
                        P.transpose() * XP, S.transpose() * XS, P.transpose() * XS,
                        fom.box(), std::move(meta),
                        store_bases ? P : Eigen::MatrixXd(),
                        store_bases ? S : Eigen::MatrixXd());
}

ReducedModel offline_build(const FullOrderModel& fom, const ParamSample& sample,
                           const Activation& act, int L, int M1, int M2,
                           const OfflineOptions& opts) {
    if (sample.size() < 1) throw InvalidInputError("offline_build: empty parameter sample");
    if (M1 > M2) throw InvalidInputError("offline_build: M1 must be <= M2");

    SnapshotSet snapshots(fom.space_ptr());
    snapshots.reserve(sample.size());
    for (int n = 0; n < sample.size(); ++n) {
        if (opts.solutions) {
            snapshots.append((*opts.solutions)[static_cast<size_t>(n)],
                             "solution " + std::to_string(n));
        } else {
            snapshots.append(fom.solve(sample.point(n)), "solution " + std::to_string(n));
        }
    }

    GenerativeSpaces spaces =
        build_generative_spaces(fom.space(), snapshots, sample, act, L, M1, M2);

    // Rank shortfalls are recorded in the metadata, not fatal.
    return build_reduced_from_bases(fom, sample, spaces.phi, spaces.psi, act.name(),
                                    std::min(L, sample.size()), opts.store_bases,
                                    spaces.phi_capped, spaces.psi_capped);
}

// ---------------------------------------------------------------------------
// Artifact format "GRB1"
// ---------------------------------------------------------------------------

namespace {

struct ArrayEntry {
    std::string name;
    const Eigen::MatrixXd* matrix = nullptr;
    Eigen::VectorXd vector;  // owned copy for vector-valued blocks
    bool is_vector = false;

    Eigen::Index rows() const { return is_vector ? vector.size() : matrix->rows(); }
    Eigen::Index cols() const { return is_vector ? 1 : matrix->cols(); }
};

void append_bytes(std::string& buffer, const void* data, size_t size) {
    buffer.append(static_cast<const char*>(data), size);
}

// Row-major little-endian float64 serialization.
void append_matrix(std::string& buffer, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            append_bytes(buffer, &v, sizeof(double));
        }
    }
}

}  // namespace

void save_rom(const ReducedModel& rm, const std::filesystem::path& path) {
    const int q = rm.num_terms();
    json header;
    header["format_version"] = rm.meta().version;
    header["q"] = q;
    header["m1"] = rm.m1();
    header["m2"] = rm.m2();
    header["n"] = rm.meta().n;
    header["l"] = rm.meta().l;
    header["activation"] = rm.meta().activation;
    header["fom_label"] = rm.meta().fom_label;
    header["output_dual_norm"] = rm.meta().output_dual_norm;
    header["full_dim"] = rm.meta().full_dim;
    header["store_bases"] = rm.has_bases();
    header["m1_capped"] = rm.meta().m1_capped;
    header["m2_capped"] = rm.meta().m2_capped;
    json theta_names = json::array();
    for (const auto& t : rm.theta()) theta_names.push_back(t.name());
    header["theta"] = theta_names;
    header["box"] = {{"lo", std::vector<double>(rm.box().lo.data(), rm.box().lo.data() + rm.box().lo.size())},
                     {"hi", std::vector<double>(rm.box().hi.data(), rm.box().hi.data() + rm.box().hi.size())}};
    json sample = json::array();
    for (const auto& p : rm.meta().sample) {
        sample.push_back(std::vector<double>(p.data(), p.data() + p.size()));
    }
    header["sample"] = sample;

    std::vector<ArrayEntry> arrays;
    for (int i = 0; i < q; ++i) {
        arrays.push_back({"A" + std::to_string(i + 1) + "_m1",
                          &rm.level1_ops()[static_cast<size_t>(i)], {}, false});
    }
    arrays.push_back({"l_m1", nullptr, rm.level1_load(), true});
    arrays.push_back({"lO_m1", nullptr, rm.level1_output(), true});
    for (int i = 0; i < q; ++i) {
        arrays.push_back({"A" + std::to_string(i + 1) + "_m2",
                          &rm.level2_ops()[static_cast<size_t>(i)], {}, false});
    }
    arrays.push_back({"l_m2", nullptr, rm.level2_load(), true});
    arrays.push_back({"lO_m2", nullptr, rm.level2_output(), true});
    arrays.push_back({"B_m1", &rm.gram_11(), {}, false});
    arrays.push_back({"B_m2", &rm.gram_22(), {}, false});
    arrays.push_back({"B_m1m2", &rm.gram_12(), {}, false});
    if (rm.has_bases()) {
        arrays.push_back({"phi", &rm.phi(), {}, false});
        arrays.push_back({"psi", &rm.psi(), {}, false});
    }

    json manifest = json::array();
    for (const auto& a : arrays) {
        manifest.push_back({{"name", a.name}, {"rows", a.rows()}, {"cols", a.cols()}});
    }
    header["arrays"] = manifest;

    const std::string header_str = header.dump();
    std::string buffer;
    buffer.reserve(header_str.size() + 64);
    append_bytes(buffer, "GRB1", 4);
    const std::uint32_t header_len = static_cast<std::uint32_t>(header_str.size());
    append_bytes(buffer, &header_len, sizeof(header_len));
    buffer += header_str;
    for (const auto& a : arrays) {
        if (a.is_vector) {
            append_matrix(buffer, a.vector);
        } else {
            append_matrix(buffer, *a.matrix);
        }
    }
    const std::uint64_t crc = Crc64::of(buffer.data(), buffer.size());
    append_bytes(buffer, &crc, sizeof(crc));

    // Atomic write: temp file in the target directory, then rename.
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ArtifactError("save_rom: cannot open " + tmp.string());
        out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        if (!out) throw ArtifactError("save_rom: short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

namespace {

std::string read_validated(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("load_rom: cannot open " + path.string());
    std::string buffer((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buffer.size() < 4 + sizeof(std::uint32_t) + sizeof(std::uint64_t)) {
        throw ArtifactError("load_rom: file too short");
    }
    if (std::memcmp(buffer.data(), "GRB1", 4) != 0) {
        throw ArtifactError("load_rom: bad magic bytes");
    }
    std::uint64_t stored_crc;
    std::memcpy(&stored_crc, buffer.data() + buffer.size() - sizeof(stored_crc),
                sizeof(stored_crc));
    if (Crc64::of(buffer.data(), buffer.size() - sizeof(std::uint64_t)) != stored_crc) {
        throw ArtifactError("load_rom: checksum mismatch");
    }
    return buffer;
}

}  // namespace

std::string read_rom_header_json(const std::filesystem::path& path) {
    const std::string buffer = read_validated(path);
    std::uint32_t header_len = 0;
    std::memcpy(&header_len, buffer.data() + 4, sizeof(header_len));
    if (4 + sizeof(std::uint32_t) + header_len + sizeof(std::uint64_t) > buffer.size()) {
        throw ArtifactError("load_rom: truncated header");
    }
    return buffer.substr(8, header_len);
}

ReducedModel load_rom(const std::filesystem::path& path) {
    const std::string buffer = read_validated(path);

    std::uint32_t header_len = 0;
    std::memcpy(&header_len, buffer.data() + 4, sizeof(header_len));
    const size_t data_begin = 4 + sizeof(std::uint32_t) + header_len;
    if (data_begin + sizeof(std::uint64_t) > buffer.size()) {
        throw ArtifactError("load_rom: truncated header");
    }

    json header;
    try {
        header = json::parse(buffer.substr(8, header_len));
    } catch (const json::exception& e) {
        throw ArtifactError(std::string("load_rom: header parse failure: ") + e.what());
    }
    if (header.value("format_version", -1) != 1) {
        throw ArtifactError("load_rom: unsupported format version");
    }

    const int q = header.at("q").get<int>();
    RomMetadata meta;
    meta.version = 1;
    meta.activation = header.at("activation").get<std::string>();
    meta.n = header.at("n").get<int>();
    meta.l = header.at("l").get<int>();
    meta.fom_label = header.at("fom_label").get<std::string>();
    meta.output_dual_norm = header.at("output_dual_norm").get<double>();
    meta.store_bases = header.at("store_bases").get<bool>();
    meta.full_dim = header.at("full_dim").get<Eigen::Index>();
    meta.m1_capped = header.value("m1_capped", false);
    meta.m2_capped = header.value("m2_capped", false);
    for (const auto& p : header.at("sample")) {
        const auto values = p.get<std::vector<double>>();
        meta.sample.push_back(Eigen::Map<const Eigen::VectorXd>(
            values.data(), static_cast<Eigen::Index>(values.size())));
    }

    std::vector<ThetaDescriptor> theta;
    for (const auto& name : header.at("theta")) {
        theta.push_back(ThetaDescriptor::parse(name.get<std::string>()));
    }
    if (static_cast<int>(theta.size()) != q) {
        throw ArtifactError("load_rom: theta descriptor count mismatch");
    }

    const auto lo_values = header.at("box").at("lo").get<std::vector<double>>();
    const auto hi_values = header.at("box").at("hi").get<std::vector<double>>();
    ParamBox box(Eigen::Map<const Eigen::VectorXd>(lo_values.data(),
                                                   static_cast<Eigen::Index>(lo_values.size())),
                 Eigen::Map<const Eigen::VectorXd>(hi_values.data(),
                                                   static_cast<Eigen::Index>(hi_values.size())));

    size_t cursor = data_begin;
    const size_t data_end = buffer.size() - sizeof(std::uint64_t);
    auto read_matrix = [&](Eigen::Index rows, Eigen::Index cols) {
        const size_t bytes = static_cast<size_t>(rows) * static_cast<size_t>(cols) * sizeof(double);
        if (cursor + bytes > data_end) throw ArtifactError("load_rom: truncated data section");
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                std::memcpy(&m(i, j), buffer.data() + cursor, sizeof(double));
                cursor += sizeof(double);
            }
        }
        return m;
    };

    const json& manifest = header.at("arrays");
    size_t entry = 0;
    auto next = [&](const std::string& expected) {
        if (entry >= manifest.size()) throw ArtifactError("load_rom: manifest too short");
        const json& e = manifest[entry++];
        if (e.at("name").get<std::string>() != expected) {
            throw ArtifactError("load_rom: unexpected array \"" + e.at("name").get<std::string>() +
                                "\", wanted \"" + expected + "\"");
        }
        return read_matrix(e.at("rows").get<Eigen::Index>(), e.at("cols").get<Eigen::Index>());
    };

    std::vector<Eigen::MatrixXd> a1, a2;
    for (int i = 0; i < q; ++i) a1.push_back(next("A" + std::to_string(i + 1) + "_m1"));
    Eigen::VectorXd l1 = next("l_m1");
    Eigen::VectorXd lO1 = next("lO_m1");
    for (int i = 0; i < q; ++i) a2.push_back(next("A" + std::to_string(i + 1) + "_m2"));
    Eigen::VectorXd l2 = next("l_m2");
    Eigen::VectorXd lO2 = next("lO_m2");
    Eigen::MatrixXd b1 = next("B_m1");
    Eigen::MatrixXd b2 = next("B_m2");
    Eigen::MatrixXd b12 = next("B_m1m2");
    Eigen::MatrixXd phi, psi;
    if (meta.store_bases) {
        phi = next("phi");
        psi = next("psi");
    }
    if (cursor != data_end) throw ArtifactError("load_rom: trailing bytes in data section");

    return ReducedModel(std::move(theta), std::move(a1), std::move(l1), std::move(lO1),
                        std::move(a2), std::move(l2), std::move(lO2), std::move(b1), std::move(b2),
                        std::move(b12), std::move(box), std::move(meta), std::move(phi),
                        std::move(psi));
}

}  // namespace grb
