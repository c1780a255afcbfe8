#include "varhmm/library_io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "varhmm/errors.hpp"
#include "varhmm/rng.hpp"

namespace varhmm {
namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(v[i]);
  }
  return out;
}

json to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = j.at(i).get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) {
    return Eigen::MatrixXd(0, 0);
  }
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw SerializationError("ragged matrix rows in library file");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return m;
}

json model_to_json(const ShdpVarModel& model) {
  json j;
  j["obs_dim"] = model.obs_dim;
  j["order"] = model.order;
  j["initial_distribution"] = to_json(model.initial_distribution);
  j["hdp"] = {{"truncation", model.hdp.truncation}, {"alpha", model.hdp.alpha},
              {"gamma", model.hdp.gamma},           {"kappa", model.hdp.kappa},
              {"rho", model.hdp.rho},               {"beta", to_json(model.hdp.beta)},
              {"pi", to_json(model.hdp.pi)}};
  json emissions = json::array();
  for (const auto& em : model.emissions) {
    json e;
    e["order"] = em.order();
    e["noise"] = to_json(em.noise().matrix());
    if (em.order() == 0) {
      e["mean"] = to_json(em.mean());
    } else {
      json coeffs = json::array();
      for (const auto& a : em.coeffs()) {
        coeffs.push_back(to_json(a));
      }
      e["coeffs"] = std::move(coeffs);
    }
    emissions.push_back(std::move(e));
  }
  j["emissions"] = std::move(emissions);
  return j;
}

ShdpVarModel model_from_json(const json& j) {
  ShdpVarModel model;
  model.obs_dim = j.at("obs_dim").get<int>();
  model.order = j.at("order").get<int>();
  model.initial_distribution = vector_from_json(j.at("initial_distribution"));
  const json& hdp = j.at("hdp");
  model.hdp.truncation = hdp.at("truncation").get<int>();
  model.hdp.alpha = hdp.at("alpha").get<double>();
  model.hdp.gamma = hdp.at("gamma").get<double>();
  model.hdp.kappa = hdp.at("kappa").get<double>();
  model.hdp.rho = hdp.at("rho").get<double>();
  model.hdp.beta = vector_from_json(hdp.at("beta"));
  model.hdp.pi = matrix_from_json(hdp.at("pi"));
  for (const json& e : j.at("emissions")) {
    SpdMatrix noise(matrix_from_json(e.at("noise")));
    if (e.at("order").get<int>() == 0) {
      model.emissions.emplace_back(vector_from_json(e.at("mean")), std::move(noise));
    } else {
      std::vector<Eigen::MatrixXd> coeffs;
      for (const json& a : e.at("coeffs")) {
        coeffs.push_back(matrix_from_json(a));
      }
      model.emissions.emplace_back(std::move(coeffs), std::move(noise));
    }
  }
  validate(model);
  return model;
}

std::string checksum_hex(const std::string& payload) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(payload)));
  return std::string("fnv1a64:") + buf;
}

}  // namespace

std::string library_to_string(const SkillLibrary& library) {
  json payload;
  payload["kind"] = "skill_library";
  payload["obs_dim"] = library.obs_dim();
  payload["features"] = {{"include_pose", library.features().include_pose},
                         {"derivative", to_string(library.features().derivative)},
                         {"smoothing_window", library.features().smoothing_window}};
  json skills = json::array();
  for (const auto& s : library.skills()) {
    json e;
    e["skill_id"] = s.skill_id;
    e["model"] = model_to_json(s.model);
    e["curve"] = {{"mean", s.curve.means()},
                  {"stddev", s.curve.stddevs()},
                  {"support_length", s.curve.support_length()}};
    e["training"] = {{"trials", s.training_trials},
                     {"mean_duration_frames", s.mean_duration_frames}};
    skills.push_back(std::move(e));
  }
  payload["skills"] = std::move(skills);

  const std::string payload_text = payload.dump();
  json file;
  file["format_version"] = kFormatVersion;
  file["checksum"] = checksum_hex(payload_text);
  file["payload"] = std::move(payload);
  return file.dump(2) + "\n";
}

SkillLibrary library_from_string(const std::string& text) {
  json file;
  try {
    file = json::parse(text);
  } catch (const json::exception& e) {
    throw SerializationError(std::string("malformed library file: ") + e.what());
  }
  try {
    const int version = file.at("format_version").get<int>();
    if (version != kFormatVersion) {
      throw SerializationError("unsupported library format version " + std::to_string(version) +
                               " (expected " + std::to_string(kFormatVersion) + ")");
    }
    const std::string payload_text = file.at("payload").dump();
    const std::string expected = file.at("checksum").get<std::string>();
    if (checksum_hex(payload_text) != expected) {
      throw SerializationError("library file checksum mismatch");
    }
    const json& payload = file.at("payload");
    if (payload.at("kind").get<std::string>() != "skill_library") {
      throw SerializationError("file does not contain a skill library");
    }
    FeatureConfig features;
    features.include_pose = payload.at("features").at("include_pose").get<bool>();
    features.derivative =
        derivative_method_from_string(payload.at("features").at("derivative").get<std::string>());
    features.smoothing_window = payload.at("features").at("smoothing_window").get<int>();

    std::vector<SkillModel> skills;
    for (const json& e : payload.at("skills")) {
      const json& curve = e.at("curve");
      skills.push_back(SkillModel{
          e.at("skill_id").get<std::string>(), model_from_json(e.at("model")),
          LikelihoodCurve(curve.at("mean").get<std::vector<double>>(),
                          curve.at("stddev").get<std::vector<double>>()),
          e.at("training").at("trials").get<int>(),
          e.at("training").at("mean_duration_frames").get<double>()});
    }
    return SkillLibrary(std::move(skills), features);
  } catch (const json::exception& e) {
    throw SerializationError(std::string("library file structure error: ") + e.what());
  }
}

void save_library(const SkillLibrary& library, const std::filesystem::path& path) {
  const std::string text = library_to_string(library);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f || !(f << text)) {
      throw IoError("cannot write library file '" + path.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("cannot move library file into place: " + ec.message());
  }
}

SkillLibrary load_library(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw IoError("cannot open library file '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << f.rdbuf();
  return library_from_string(buf.str());
}

}  // namespace varhmm
