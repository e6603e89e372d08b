#include "depnn/numerics.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace depnn {

GradientCheckReport gradient_check(const std::function<double()>& loss, ParameterStore& store,
                                   const GradientCheckOptions& options) {
    const double eps = options.epsilon;
    if (!std::isfinite(loss())) {
        throw NonFiniteLoss("gradient_check: loss is not finite at the current parameters");
    }
    std::mt19937_64 rng(options.seed);

    GradientCheckReport report;
    for (auto& [name, p] : store) {
        const Eigen::Index total = p.value.size();
        std::vector<Eigen::Index> entries(static_cast<std::size_t>(total));
        std::iota(entries.begin(), entries.end(), Eigen::Index{0});
        if (options.max_entries_per_tensor > 0 && entries.size() > options.max_entries_per_tensor) {
            std::shuffle(entries.begin(), entries.end(), rng);
            entries.resize(options.max_entries_per_tensor);
            std::sort(entries.begin(), entries.end());
        }

        TensorCheck check{name, entries.size(), 0.0, 0.0};
        for (Eigen::Index flat : entries) {
            double& slot = p.value.data()[flat];
            const double original = slot;
            slot = original + eps;
            const double plus = loss();
            slot = original - eps;
            const double minus = loss();
            slot = original;
            if (!std::isfinite(plus) || !std::isfinite(minus)) {
                throw NonFiniteLoss("gradient_check: non-finite loss while perturbing " + name);
            }
            const double numeric = (plus - minus) / (2.0 * eps);
            const double analytic = p.grad.data()[flat];
            const double abs_err = std::abs(analytic - numeric);
            const double scale = std::max({std::abs(analytic), std::abs(numeric), options.scale_floor});
            check.max_abs_error = std::max(check.max_abs_error, abs_err);
            check.max_relative_error = std::max(check.max_relative_error, abs_err / scale);
        }
        report.tensors.push_back(std::move(check));
    }
    return report;
}

namespace {

const char* dtype_name(DType d) { return d == DType::F64 ? "f64" : "f32"; }

std::size_t dtype_size(DType d) { return d == DType::F64 ? 8 : 4; }

void put_le(std::string& buf, std::uint64_t bits, std::size_t width) {
    for (std::size_t b = 0; b < width; ++b) {
        buf.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
}

std::uint64_t get_le(const unsigned char* p, std::size_t width) {
    std::uint64_t bits = 0;
    for (std::size_t b = 0; b < width; ++b) {
        bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    }
    return bits;
}

} // namespace

void write_tensors(std::ostream& out, const ParameterStore& store, DType dtype) {
    std::ostringstream manifest;
    std::string payload;
    manifest << "tensors " << store.size() << '\n';
    for (const auto& [name, p] : store) {
        if (name.find_first_of(" \t\n") != std::string::npos) {
            throw FormatError("tensor name contains whitespace: '" + name + "'");
        }
        manifest << name << ' ' << p.value.rows() << ' ' << p.value.cols() << ' '
                 << dtype_name(dtype) << ' ' << payload.size() << '\n';
        for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
            for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
                const double v = p.value(i, j);
                if (dtype == DType::F64) {
                    put_le(payload, std::bit_cast<std::uint64_t>(v), 8);
                } else {
                    put_le(payload, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
                }
            }
        }
    }
    manifest << "end\n";
    out << manifest.str();
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

void read_tensors(std::istream& in, ParameterStore& store) {
    struct Entry {
        std::string name;
        Eigen::Index rows, cols;
        DType dtype;
        std::size_t offset;
    };
    std::string line;
    if (!std::getline(in, line) || line.rfind("tensors ", 0) != 0) {
        throw FormatError("expected 'tensors <count>' manifest header");
    }
    const std::size_t count = std::stoul(line.substr(8));
    std::vector<Entry> entries;
    std::size_t payload_size = 0;
    for (std::size_t k = 0; k < count; ++k) {
        if (!std::getline(in, line)) {
            throw FormatError("truncated tensor manifest");
        }
        std::istringstream fields(line);
        Entry e;
        std::string dtype;
        if (!(fields >> e.name >> e.rows >> e.cols >> dtype >> e.offset) ||
            (dtype != "f64" && dtype != "f32")) {
            throw FormatError("bad tensor manifest line: " + line);
        }
        e.dtype = dtype == "f64" ? DType::F64 : DType::F32;
        payload_size = std::max(payload_size,
                                e.offset + static_cast<std::size_t>(e.rows * e.cols) * dtype_size(e.dtype));
        entries.push_back(e);
    }
    if (!std::getline(in, line) || line != "end") {
        throw FormatError("tensor manifest not terminated by 'end'");
    }
    std::vector<unsigned char> payload(payload_size);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload_size));
    if (static_cast<std::size_t>(in.gcount()) != payload_size) {
        throw FormatError("tensor payload truncated");
    }
    for (const auto& e : entries) {
        if (!store.contains(e.name)) {
            throw FormatError("model file has unknown tensor '" + e.name + "'");
        }
        auto& p = store.at(e.name);
        if (p.value.rows() != e.rows || p.value.cols() != e.cols) {
            throw ShapeMismatch("tensor '" + e.name + "' shape differs from the model configuration");
        }
        const std::size_t width = dtype_size(e.dtype);
        const unsigned char* cursor = payload.data() + e.offset;
        for (Eigen::Index i = 0; i < e.rows; ++i) {
            for (Eigen::Index j = 0; j < e.cols; ++j, cursor += width) {
                const std::uint64_t bits = get_le(cursor, width);
                p.value(i, j) = e.dtype == DType::F64
                                    ? std::bit_cast<double>(bits)
                                    : static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(bits)));
            }
        }
    }
    if (entries.size() != store.size()) {
        throw FormatError("model file has " + std::to_string(entries.size()) + " tensors, expected " +
                          std::to_string(store.size()));
    }
}

} // namespace depnn
