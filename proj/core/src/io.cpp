#include "stiga/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace stiga {

namespace {

constexpr char kMagic[4] = {'S', 'T', 'S', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(os, bits);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

double get_f64(std::istream& is) {
    const std::uint64_t bits = get_u64(is);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void put_knots(std::ostream& os, const std::vector<double>& knots) {
    put_u64(os, knots.size());
    for (double k : knots) put_f64(os, k);
}

std::vector<double> get_knots(std::istream& is) {
    std::vector<double> knots(get_u64(is));
    for (double& k : knots) k = get_f64(is);
    return knots;
}

}  // namespace

std::vector<TensorSpace> SolutionFile::spaces() const {
    std::vector<TensorSpace> out;
    const int slabs = static_cast<int>(coeffs.size());
    for (int l = 0; l < slabs; ++l) {
        std::vector<KnotVector> axes;
        for (const auto& k : spatial_knots) axes.emplace_back(k, degree);
        if (transient) axes.emplace_back(time_knots[l], degree);
        out.emplace_back(std::move(axes), transient);
    }
    return out;
}

void write_solution(const std::string& path, const SolutionFile& file) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.write(kMagic, 4);
    put_u32(os, kVersion);
    put_u32(os, static_cast<std::uint32_t>(file.degree));
    put_u32(os, static_cast<std::uint32_t>(file.d));
    put_u32(os, file.transient ? 1 : 0);
    put_u32(os, static_cast<std::uint32_t>(file.coeffs.size()));
    for (const auto& k : file.spatial_knots) put_knots(os, k);
    if (file.transient) {
        for (const auto& k : file.time_knots) put_knots(os, k);
    }
    for (const auto& c : file.coeffs) {
        put_u64(os, static_cast<std::uint64_t>(c.size()));
        for (Eigen::Index i = 0; i < c.size(); ++i) put_f64(os, c[i]);
    }
    put_u64(os, file.case_name.size());
    os.write(file.case_name.data(), static_cast<std::streamsize>(file.case_name.size()));
    put_u32(os, file.stabilized ? 1 : 0);
    put_u32(os, file.stab.regularized ? 1 : 0);
    put_f64(os, file.stab.q);
    put_f64(os, file.stab.sigma);
    put_f64(os, file.stab.epsilon);
    put_f64(os, file.stab.gamma);
    put_f64(os, file.stab.length_ref);
    if (!os) throw std::runtime_error("failed writing " + path);
}

SolutionFile read_solution(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error(path + " is not a solution file");
    }
    const std::uint32_t version = get_u32(is);
    if (version != kVersion) {
        throw std::runtime_error("unsupported solution file version");
    }
    SolutionFile file;
    file.degree = static_cast<int>(get_u32(is));
    file.d = static_cast<int>(get_u32(is));
    file.transient = get_u32(is) != 0;
    const std::uint32_t slabs = get_u32(is);
    file.spatial_knots.resize(file.d);
    for (auto& k : file.spatial_knots) k = get_knots(is);
    if (file.transient) {
        file.time_knots.resize(slabs);
        for (auto& k : file.time_knots) k = get_knots(is);
    }
    file.coeffs.resize(slabs);
    for (auto& c : file.coeffs) {
        c.resize(static_cast<Eigen::Index>(get_u64(is)));
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = get_f64(is);
    }
    std::string name(get_u64(is), '\0');
    is.read(name.data(), static_cast<std::streamsize>(name.size()));
    file.case_name = std::move(name);
    file.stabilized = get_u32(is) != 0;
    file.stab.regularized = get_u32(is) != 0;
    file.stab.q = get_f64(is);
    file.stab.sigma = get_f64(is);
    file.stab.epsilon = get_f64(is);
    file.stab.gamma = get_f64(is);
    file.stab.length_ref = get_f64(is);
    if (!is) throw std::runtime_error("truncated solution file " + path);
    return file;
}

SolutionFile to_solution_file(const CaseRun& run, const std::string& case_name) {
    SolutionFile file;
    const TensorSpace& first = run.trajectory.spaces.front();
    file.degree = first.degree();
    file.d = first.spatial_dims();
    file.transient = first.transient();
    for (int a = 0; a < file.d; ++a) {
        file.spatial_knots.push_back(first.axis(a).knots());
    }
    for (const auto& sp : run.trajectory.spaces) {
        if (file.transient) file.time_knots.push_back(sp.time_axis().knots());
    }
    file.coeffs = run.trajectory.coeffs;
    file.case_name = case_name;
    file.stabilized = run.stabilized;
    file.stab = run.stab_used;
    return file;
}

namespace {

std::ofstream open_csv(const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.precision(17);
    return os;
}

}  // namespace

void write_errors_csv(const std::string& path, const ConvergenceResult& result) {
    auto os = open_csv(path);
    os << "level,h,dt,l2_rel,h1_rel\n";
    for (const auto& lvl : result.levels) {
        os << lvl.level << ',' << lvl.h << ',' << lvl.dt << ',' << lvl.l2 << ','
           << lvl.h1 << '\n';
    }
}

void write_rates_csv(const std::string& path,
                     const std::vector<std::pair<int, ConvergenceResult>>& by_order) {
    auto os = open_csv(path);
    os << "order,l2_rate,h1_rate\n";
    for (const auto& [order, res] : by_order) {
        os << order << ',' << res.l2_rate << ',' << res.h1_rate << '\n';
    }
}

void write_dmp_csv(const std::string& path, const DmpReport& report) {
    auto os = open_csv(path);
    os << report.csv_header() << '\n' << report.csv_row() << '\n';
}

void write_iterations_csv(const std::string& path,
                          const std::vector<SolveResult>& per_slab) {
    auto os = open_csv(path);
    os << "iter,update_norm,residual_norm,phase\n";
    for (std::size_t l = 0; l < per_slab.size(); ++l) {
        if (per_slab.size() > 1) os << "# slab " << l << '\n';
        for (const auto& rec : per_slab[l].history) {
            os << rec.iter << ',' << rec.update_norm << ',' << rec.residual_norm << ','
               << rec.phase << '\n';
        }
    }
}

void write_profile_csv(const std::string& path,
                       const std::vector<std::pair<double, double>>& samples) {
    auto os = open_csv(path);
    os << "coordinate,value\n";
    for (const auto& [x, v] : samples) os << x << ',' << v << '\n';
}

}  // namespace stiga
