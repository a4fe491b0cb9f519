#include "skillplan/model_io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace skillplan::model_io {
namespace {

constexpr const char* kTag = "skillplan-model";

std::string format_double(double v) {
    // Shortest text that parses back to the same double.
    char buf[40];
    const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;
    return std::string(buf, end);
}

void write_vector(std::ostream& os, const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        os << ' ' << format_double(v[i]);
    }
}

void expect(std::istream& is, const std::string& key) {
    std::string word;
    if (!(is >> word) || word != key) {
        throw std::runtime_error("model file: expected '" + key + "', found '" + word + "'");
    }
}

double read_double(std::istream& is) {
    std::string word;
    if (!(is >> word)) {
        throw std::runtime_error("model file: truncated");
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(word, &used);
        if (used != word.size()) {
            throw std::invalid_argument(word);
        }
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("model file: bad number '" + word + "'");
    }
}

long read_int(std::istream& is) {
    long v = 0;
    if (!(is >> v)) {
        throw std::runtime_error("model file: expected an integer");
    }
    return v;
}

Eigen::VectorXd read_vector(std::istream& is, Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v[i] = read_double(is);
    }
    return v;
}

pinn::SkillSchema schema_from_id(const std::string& id) {
    const auto plus = id.find('+');
    const SkillKind kind = skill_from_string(id.substr(0, plus));
    if (plus == std::string::npos) {
        return pinn::make_schema(kind);
    }
    if (id.substr(plus + 1) != "friction") {
        throw std::runtime_error("model file: unknown generalised parameter in schema '" + id + "'");
    }
    // Range is overwritten from the stored input box.
    return pinn::make_generalized_schema(kind, 0.0, 1.0);
}

}  // namespace

void write_model(std::ostream& os, const pinn::PinnModel& model) {
    const auto& p = model.physics;
    os << kTag << ' ' << kFormatVersion << '\n';
    os << "schema " << pinn::schema_id(model.schema) << '\n';
    os << "physics " << format_double(p.gravity) << ' ' << format_double(p.length) << ' ' << format_double(p.friction)
       << ' ' << format_double(p.restitution) << ' ' << format_double(p.mass_impactor) << ' '
       << format_double(p.mass_target) << ' ' << format_double(p.wedge_angle) << '\n';
    os << "epsilon " << format_double(model.epsilon) << '\n';
    if (model.latent) {
        os << "latent " << model.latent->name << ' ' << format_double(model.latent->value) << ' '
           << format_double(model.latent->lower) << ' ' << format_double(model.latent->upper) << '\n';
    } else {
        os << "latent none\n";
    }
    os << "input_box " << model.schema.input_width();
    write_vector(os, model.schema.input_box.lower);
    write_vector(os, model.schema.input_box.upper);
    os << "\noutput_box " << model.schema.output_width();
    write_vector(os, model.schema.output_box.lower);
    write_vector(os, model.schema.output_box.upper);
    os << "\nwidths " << model.net.widths().size();
    for (int w : model.net.widths()) {
        os << ' ' << w;
    }
    os << "\nparams " << model.net.parameter_count() << '\n';
    const Eigen::VectorXd& v = model.net.values();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        os << format_double(v[i]) << '\n';
    }
    os << "end\n";
    if (!os) {
        throw std::runtime_error("failed to write model");
    }
}

pinn::PinnModel read_model(std::istream& is) {
    expect(is, kTag);
    const long version = read_int(is);
    if (version != kFormatVersion) {
        throw std::runtime_error("model file: unsupported format version " + std::to_string(version));
    }
    expect(is, "schema");
    std::string id;
    is >> id;
    pinn::SkillSchema schema = schema_from_id(id);

    expect(is, "physics");
    dynamics::PhysParams phys;
    phys.gravity = read_double(is);
    phys.length = read_double(is);
    phys.friction = read_double(is);
    phys.restitution = read_double(is);
    phys.mass_impactor = read_double(is);
    phys.mass_target = read_double(is);
    phys.wedge_angle = read_double(is);

    expect(is, "epsilon");
    const double epsilon = read_double(is);

    expect(is, "latent");
    std::optional<pinn::LatentParam> latent;
    std::string name;
    is >> name;
    if (name != "none") {
        pinn::LatentParam lp;
        lp.name = name;
        lp.value = read_double(is);
        lp.lower = read_double(is);
        lp.upper = read_double(is);
        latent = lp;
    }

    expect(is, "input_box");
    const long n_in = read_int(is);
    if (n_in != schema.input_width()) {
        throw std::runtime_error("model file: input width does not match schema '" + id + "'");
    }
    schema.input_box.lower = read_vector(is, n_in);
    schema.input_box.upper = read_vector(is, n_in);
    expect(is, "output_box");
    const long n_out = read_int(is);
    if (n_out != schema.output_width()) {
        throw std::runtime_error("model file: output width does not match schema '" + id + "'");
    }
    schema.output_box.lower = read_vector(is, n_out);
    schema.output_box.upper = read_vector(is, n_out);

    expect(is, "widths");
    const long layers = read_int(is);
    if (layers < 2) {
        throw std::runtime_error("model file: need at least two layer widths");
    }
    std::vector<int> widths;
    for (long i = 0; i < layers; ++i) {
        widths.push_back(static_cast<int>(read_int(is)));
    }
    if (widths.front() != n_in || widths.back() != n_out) {
        throw std::runtime_error("model file: network widths do not match the schema");
    }
    expect(is, "params");
    const long count = read_int(is);

    pinn::PinnModel model = pinn::PinnModel::create(schema, phys, 0, 1, 1);
    model.net = net::NetParams(widths);
    if (static_cast<std::size_t>(count) != model.net.parameter_count()) {
        throw std::runtime_error("model file: parameter count does not match the widths");
    }
    model.net.values() = read_vector(is, count);
    expect(is, "end");
    model.epsilon = epsilon;
    model.latent = latent;
    return model;
}

void save_model(const std::string& path, const pinn::PinnModel& model) {
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot write model file '" + path + "'");
    }
    write_model(os, model);
}

pinn::PinnModel load_model(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw std::runtime_error("cannot open model file '" + path + "'");
    }
    try {
        return read_model(is);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void save_model_set(const std::string& directory, const rollout::ModelSet& models) {
    std::filesystem::create_directories(directory);
    for (const auto& [kind, model] : models.all()) {
        save_model((std::filesystem::path(directory) / (std::string(to_string(kind)) + ".model")).string(), model);
    }
}

rollout::ModelSet load_model_set(const std::string& directory) {
    if (!std::filesystem::is_directory(directory)) {
        throw std::runtime_error("model directory '" + directory + "' does not exist");
    }
    rollout::ModelSet set;
    for (SkillKind k : {SkillKind::Swing, SkillKind::Slide, SkillKind::Throw, SkillKind::Bounce, SkillKind::Hit}) {
        const auto path = std::filesystem::path(directory) / (std::string(to_string(k)) + ".model");
        if (std::filesystem::exists(path)) {
            pinn::PinnModel m = load_model(path.string());
            if (m.schema.kind != k) {
                throw std::runtime_error(path.string() + " holds a " + std::string(to_string(m.schema.kind)) +
                                         " model");
            }
            set.put(std::move(m));
        }
    }
    return set;
}

void write_dataset(std::ostream& os, const pinn::SkillSchema& schema, const pinn::TrainSet& set) {
    os << "kind";
    for (const auto& n : schema.inputs) {
        os << ',' << n;
    }
    for (const auto& n : schema.outputs) {
        os << ',' << n;
    }
    os << '\n';
    for (Eigen::Index j = 0; j < set.inputs.cols(); ++j) {
        os << "data";
        for (Eigen::Index i = 0; i < set.inputs.rows(); ++i) {
            os << ',' << format_double(set.inputs(i, j));
        }
        for (Eigen::Index i = 0; i < set.targets.rows(); ++i) {
            os << ',' << format_double(set.targets(i, j));
        }
        os << '\n';
    }
    for (Eigen::Index j = 0; j < set.collocation.cols(); ++j) {
        os << "collocation";
        for (Eigen::Index i = 0; i < set.collocation.rows(); ++i) {
            os << ',' << format_double(set.collocation(i, j));
        }
        for (int i = 0; i < schema.output_width(); ++i) {
            os << ',';
        }
        os << '\n';
    }
}

void write_history(std::ostream& os, const pinn::TrainingHistory& history) {
    os << "cycle,total,data,physics\n";
    for (std::size_t k = 0; k < history.total_loss.size(); ++k) {
        os << k << ',' << format_double(history.total_loss[k]) << ',' << format_double(history.data_loss[k]) << ','
           << format_double(history.physics_loss[k]) << '\n';
    }
}

}  // namespace skillplan::model_io
