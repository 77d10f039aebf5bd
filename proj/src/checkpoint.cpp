#include "wordbound/nn/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "wordbound/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are little-endian; big-endian hosts need byte swaps");

namespace wordbound::nn {

namespace {

constexpr const char* kMagic = "wordbound-checkpoint v1";

void write_tensor(std::ostream& out, const Matrix<float>& m) {
    out.write(reinterpret_cast<const char*>(m.data.data()),
              static_cast<std::streamsize>(m.data.size() * sizeof(float)));
}

void read_tensor(std::istream& in, Matrix<float>& m) {
    in.read(reinterpret_cast<char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(float)));
    if (!in) {
        throw BadCheckpoint("truncated tensor payload");
    }
}

}  // namespace

nlohmann::json config_to_json(const ModelConfig& config) {
    return nlohmann::json{
        {"n_layers", config.n_layers},
        {"n_heads", config.n_heads},
        {"d_model", config.d_model},
        {"d_ff", config.d_ff},
        {"vocab_size", config.vocab_size},
        {"max_seq_len", config.max_seq_len},
        {"wb_schema", boundary::schema_name(config.wb_schema)},
        {"implicit_head", config.implicit_head},
        {"boundary_head_all_positions", config.boundary_head_all_positions},
        {"allow_wb_tokens_with_implicit", config.allow_wb_tokens_with_implicit},
    };
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.n_layers = j.at("n_layers").get<int>();
    c.n_heads = j.at("n_heads").get<int>();
    c.d_model = j.at("d_model").get<int>();
    c.d_ff = j.value("d_ff", 0);
    c.vocab_size = j.at("vocab_size").get<int>();
    c.max_seq_len = j.at("max_seq_len").get<int>();
    c.wb_schema = boundary::schema_from_name(j.value("wb_schema", "none"));
    c.implicit_head = j.value("implicit_head", false);
    c.boundary_head_all_positions = j.value("boundary_head_all_positions", false);
    c.allow_wb_tokens_with_implicit = j.value("allow_wb_tokens_with_implicit", false);
    c.validate();
    return c;
}

void save_checkpoint(const std::string& path, const Parameters<float>& params,
                     const nlohmann::json& meta,
                     const std::map<std::string, Matrix<float>>& extra) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    nlohmann::json header = meta;
    header["config"] = config_to_json(params.config);
    out << kMagic << '\n' << header.dump() << '\n';
    // tensor_registry wants a mutable reference but we only read shapes/data
    auto refs = tensor_registry(const_cast<Parameters<float>&>(params));
    for (const auto& ref : refs) {
        out << "tensor " << ref.name << ' ' << ref.tensor->rows << ' ' << ref.tensor->cols
            << '\n';
    }
    for (const auto& [name, m] : extra) {
        out << "tensor " << name << ' ' << m.rows << ' ' << m.cols << '\n';
    }
    out << "end\n";
    for (const auto& ref : refs) {
        write_tensor(out, *ref.tensor);
    }
    for (const auto& [name, m] : extra) {
        write_tensor(out, m);
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

Parameters<float> load_checkpoint(const std::string& path, nlohmann::json* meta,
                                  std::map<std::string, Matrix<float>>* extra) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for reading: " + path);
    }
    std::string line;
    if (!std::getline(in, line) || line != kMagic) {
        throw BadCheckpoint("bad magic line in " + path);
    }
    if (!std::getline(in, line)) {
        throw BadCheckpoint("missing header JSON in " + path);
    }
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw BadCheckpoint(std::string("unparsable header JSON: ") + e.what());
    }
    if (!header.contains("config")) {
        throw BadCheckpoint("header lacks a config object");
    }
    ModelConfig config = config_from_json(header["config"]);
    Parameters<float> params = make_zero_params<float>(config);
    auto refs = tensor_registry(params);

    struct Decl {
        std::string name;
        int rows;
        int cols;
    };
    std::vector<Decl> decls;
    while (std::getline(in, line)) {
        if (line == "end") {
            break;
        }
        std::istringstream ls(line);
        std::string kw;
        Decl d;
        if (!(ls >> kw >> d.name >> d.rows >> d.cols) || kw != "tensor" || d.rows < 0 ||
            d.cols < 0) {
            throw BadCheckpoint("bad tensor declaration: " + line);
        }
        decls.push_back(std::move(d));
    }
    if (line != "end") {
        throw BadCheckpoint("header not terminated by 'end'");
    }

    size_t next_param = 0;
    for (const auto& d : decls) {
        if (next_param < refs.size() && refs[next_param].name == d.name) {
            auto& m = *refs[next_param].tensor;
            if (m.rows != d.rows || m.cols != d.cols) {
                throw BadCheckpoint("tensor " + d.name + " has shape " + std::to_string(d.rows) +
                                    "x" + std::to_string(d.cols) + ", config implies " +
                                    std::to_string(m.rows) + "x" + std::to_string(m.cols));
            }
            read_tensor(in, m);
            ++next_param;
            continue;
        }
        Matrix<float> m(d.rows, d.cols);
        read_tensor(in, m);
        if (extra) {
            (*extra)[d.name] = std::move(m);
        }
    }
    if (next_param != refs.size()) {
        throw BadCheckpoint("checkpoint is missing tensor " + refs[next_param].name);
    }
    if (meta) {
        *meta = header;
    }
    return params;
}

}  // namespace wordbound::nn
