#include "icpovm/serialization.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace icpovm {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

json povm_file_to_json(const PovmFile& file) {
    const auto one = [](const PovmClassSpec& spec) {
        json j;
        j["class"] = povm_class_name(spec.class_id);
        j["params"] = spec.params;
        return j;
    };
    if (file.factors.size() == 1) {
        return one(file.factors[0]);
    }
    json j;
    j["product"] = json::array();
    for (const auto& f : file.factors) {
        j["product"].push_back(one(f));
    }
    return j;
}

PovmFile povm_file_from_json(const json& j) {
    const auto one = [](const json& obj) {
        if (!obj.contains("class")) {
            throw IoError("povm file: missing \"class\"");
        }
        PovmClassSpec spec;
        spec.class_id = povm_class_from_name(obj.at("class").get<std::string>());
        if (obj.contains("params")) {
            spec.params = obj.at("params").get<std::vector<double>>();
        }
        return spec;
    };
    PovmFile file;
    if (j.contains("product")) {
        for (const auto& obj : j.at("product")) {
            file.factors.push_back(one(obj));
        }
        if (file.factors.empty()) {
            throw IoError("povm file: empty product");
        }
    } else {
        file.factors.push_back(one(j));
    }
    return file;
}

PovmFile load_povm_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open povm file: " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("povm file " + path + ": " + e.what());
    }
    return povm_file_from_json(j);
}

ProductPovm build_product_povm(const PovmFile& file) {
    std::vector<Povm> factors;
    for (const auto& spec : file.factors) {
        factors.push_back(build_povm(spec));
    }
    return ProductPovm(std::move(factors));
}

std::string povm_description_hash(const PovmFile& file) {
    const std::string dump = povm_file_to_json(file).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream out;
    out << "fnv1a64:" << std::hex << h;
    return out.str();
}

HermitianOperator observable_from_json(const json& j) {
    if (j.contains("dense")) {
        const auto& d = j.at("dense");
        const auto re = d.at("re").get<std::vector<std::vector<double>>>();
        const auto im = d.contains("im") ? d.at("im").get<std::vector<std::vector<double>>>()
                                         : std::vector<std::vector<double>>();
        const auto n = static_cast<Eigen::Index>(re.size());
        Matrix m(n, n);
        for (Eigen::Index r = 0; r < n; ++r) {
            if (static_cast<Eigen::Index>(re[r].size()) != n) {
                throw IoError("observable: dense \"re\" is not square");
            }
            for (Eigen::Index c = 0; c < n; ++c) {
                const double imag = im.empty() ? 0.0 : im.at(r).at(c);
                m(r, c) = Cplx(re[r][c], imag);
            }
        }
        return HermitianOperator(std::move(m));
    }
    if (j.contains("paulis")) {
        PauliSum sum;
        sum.n_sites = j.at("n_qubits").get<int>();
        for (const auto& t : j.at("paulis")) {
            sum.terms.push_back({t.at("ops").get<std::string>(), t.at("coeff").get<double>()});
        }
        return HermitianOperator::symmetrized(sum.to_matrix());
    }
    throw IoError("observable: expected \"dense\" or \"paulis\"");
}

HermitianOperator load_observable(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open observable file: " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("observable file " + path + ": " + e.what());
    }
    try {
        return observable_from_json(j);
    } catch (const json::exception& e) {
        throw IoError("observable file " + path + ": " + e.what());
    }
}

json observable_to_json(const HermitianOperator& obs) {
    const Eigen::Index n = obs.dim();
    std::vector<std::vector<double>> re(n, std::vector<double>(n));
    std::vector<std::vector<double>> im(n, std::vector<double>(n));
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            re[r][c] = obs.matrix()(r, c).real();
            im[r][c] = obs.matrix()(r, c).imag();
        }
    }
    json j;
    j["dense"]["re"] = re;
    j["dense"]["im"] = im;
    return j;
}

void write_shot_file(const std::string& path, const OutcomeRecord& record) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open shot file for writing: " + path);
    }
    json header;
    header["povm_hash"] = record.povm_ref;
    header["n_qubits"] = record.n_sites;
    header["outcomes_per_site"] = record.radices;
    out << header.dump() << "\n";
    for (const auto& shot : record.outcomes) {
        out << json(shot).dump() << "\n";
    }
}

OutcomeRecord read_shot_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open shot file: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError(path + ": missing header line");
    }
    OutcomeRecord record;
    try {
        const json header = json::parse(line);
        record.povm_ref = header.at("povm_hash").get<std::string>();
        record.n_sites = header.at("n_qubits").get<int>();
        record.radices = header.at("outcomes_per_site").get<std::vector<int>>();
    } catch (const json::exception& e) {
        throw IoError(path + ": line 1: bad header: " + e.what());
    }
    if (static_cast<int>(record.radices.size()) != record.n_sites) {
        throw IoError(path + ": line 1: outcomes_per_site length mismatch");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<int> shot;
        try {
            shot = json::parse(line).get<std::vector<int>>();
        } catch (const json::exception& e) {
            throw IoError(path + ": line " + std::to_string(line_no) + ": " + e.what());
        }
        if (static_cast<int>(shot.size()) != record.n_sites) {
            throw IoError(path + ": line " + std::to_string(line_no) + ": expected " +
                          std::to_string(record.n_sites) + " outcomes");
        }
        for (int s = 0; s < record.n_sites; ++s) {
            if (shot[s] < 0 || shot[s] >= record.radices[s]) {
                throw IoError(path + ": line " + std::to_string(line_no) +
                              ": outcome index out of range");
            }
        }
        record.outcomes.push_back(std::move(shot));
    }
    return record;
}

json dual_frame_to_json(const DualFrame& duals, const std::vector<RVector>* weights) {
    const auto matrix_to_json = [](const Matrix& m) {
        json re = json::array(), im = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            json rrow = json::array(), irow = json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                rrow.push_back(m(r, c).real());
                irow.push_back(m(r, c).imag());
            }
            re.push_back(std::move(rrow));
            im.push_back(std::move(irow));
        }
        json j;
        j["re"] = std::move(re);
        j["im"] = std::move(im);
        return j;
    };
    json j;
    j["provenance"] = provenance_name(duals.provenance());
    if (duals.is_product()) {
        j["groups"] = json::array();
        for (std::size_t g = 0; g < duals.groups().size(); ++g) {
            const auto& grp = duals.groups()[g];
            json gj;
            gj["sites"] = grp.sites;
            gj["outcomes_per_site"] = grp.radices;
            gj["duals"] = json::array();
            for (const auto& d : grp.duals) {
                gj["duals"].push_back(matrix_to_json(d));
            }
            if (weights != nullptr) {
                gj["weights"] = std::vector<double>((*weights)[g].data(),
                                                    (*weights)[g].data() + (*weights)[g].size());
            }
            j["groups"].push_back(std::move(gj));
        }
    } else {
        j["duals"] = json::array();
        for (const auto& d : duals.global_duals()) {
            j["duals"].push_back(matrix_to_json(d));
        }
        if (weights != nullptr && !weights->empty()) {
            j["weights"] = std::vector<double>((*weights)[0].data(),
                                               (*weights)[0].data() + (*weights)[0].size());
        }
    }
    return j;
}

json frequency_model_to_json(const FrequencyModel& model) {
    json j;
    j["partition"] = model.partition().groups;
    j["m_max"] = model.partition().m_max;
    j["s_bias"] = model.s_bias();
    j["shots_used"] = model.shots_used();
    j["tables"] = json::array();
    for (const auto& t : model.tables()) {
        j["tables"].push_back(std::vector<double>(t.data(), t.data() + t.size()));
    }
    return j;
}

}  // namespace icpovm
