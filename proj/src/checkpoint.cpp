#include "diffged/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace diffged {

namespace {

constexpr char kMagic[4] = {'D', 'G', 'E', 'D'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ParseError("checkpoint is truncated");
  return value;
}

nlohmann::json config_to_json(const DenoiserConfig& c) {
  return {{"layer_dims", c.layer_dims},
          {"vocab_size", c.vocab_size},
          {"pair_embedding_dim", c.pair_embedding_dim},
          {"frequency_base", c.frequency_base},
          {"use_graph_norm", c.use_graph_norm}};
}

DenoiserConfig config_from_json(const nlohmann::json& j) {
  DenoiserConfig c;
  c.layer_dims = j.at("layer_dims").get<std::vector<int>>();
  c.vocab_size = j.at("vocab_size").get<int>();
  c.pair_embedding_dim = j.at("pair_embedding_dim").get<int>();
  c.frequency_base = j.at("frequency_base").get<double>();
  c.use_graph_norm = j.at("use_graph_norm").get<bool>();
  c.validate();
  return c;
}

void write_blocks(std::ostream& out, DenoiserParams<double>& params) {
  for (const auto& b : params.blocks()) {
    out.write(reinterpret_cast<const char*>(b.data), static_cast<std::streamsize>(b.size() * sizeof(double)));
  }
}

void read_blocks(std::istream& in, DenoiserParams<double>& params) {
  for (const auto& b : params.blocks()) {
    in.read(reinterpret_cast<char*>(b.data), static_cast<std::streamsize>(b.size() * sizeof(double)));
    if (!in) throw ParseError("checkpoint is truncated in block " + b.name);
  }
}

}  // namespace

void write_checkpoint(const Checkpoint& checkpoint, std::ostream& out) {
  auto params = checkpoint.params;
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : params.blocks()) blocks.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}});
  nlohmann::json header = {
      {"config", config_to_json(params.config)},
      {"vocab", checkpoint.vocab.names()},
      {"schedule",
       {{"steps", checkpoint.schedule.steps},
        {"beta_start", checkpoint.schedule.beta_start},
        {"beta_end", checkpoint.schedule.beta_end}}},
      {"blocks", blocks},
      {"optimizer", nullptr}};
  if (checkpoint.optimizer) {
    const auto& o = *checkpoint.optimizer;
    header["optimizer"] = {{"step", o.step},
                           {"beta1", o.options.beta1},
                           {"beta2", o.options.beta2},
                           {"epsilon", o.options.epsilon}};
  }
  const std::string text = header.dump();
  out.write(kMagic, sizeof(kMagic));
  write_raw(out, kVersion);
  write_raw(out, static_cast<std::uint64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_blocks(out, params);
  if (checkpoint.optimizer) {
    auto state = *checkpoint.optimizer;
    write_blocks(out, state.first_moment);
    write_blocks(out, state.second_moment);
  }
  if (!out) throw Error("failed to write checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw ParseError("not a checkpoint file");
  const auto version = read_raw<std::uint32_t>(in);
  if (version != kVersion) throw ParseError("unsupported checkpoint version " + std::to_string(version));
  const auto length = read_raw<std::uint64_t>(in);
  if (length > (1u << 26)) throw ParseError("checkpoint header is implausibly large");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw ParseError("checkpoint is truncated in the header");

  Checkpoint out;
  try {
    const auto header = nlohmann::json::parse(text);
    out.params = DenoiserParams<double>::zeros(config_from_json(header.at("config")));
    out.vocab = LabelVocabulary(header.at("vocab").get<std::vector<std::string>>());
    const auto& s = header.at("schedule");
    out.schedule = {s.at("steps").get<int>(), s.at("beta_start").get<double>(), s.at("beta_end").get<double>()};
    const auto expected = out.params.blocks();
    const auto& listed = header.at("blocks");
    if (listed.size() != expected.size()) throw ParseError("checkpoint block list does not match its config");
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (listed[i].at("name").get<std::string>() != expected[i].name ||
          listed[i].at("rows").get<Eigen::Index>() != expected[i].rows ||
          listed[i].at("cols").get<Eigen::Index>() != expected[i].cols) {
        throw ParseError("checkpoint block " + std::to_string(i) + " does not match its config");
      }
    }
    if (!header.at("optimizer").is_null()) {
      const auto& o = header.at("optimizer");
      AdamOptions options{o.at("beta1").get<double>(), o.at("beta2").get<double>(), o.at("epsilon").get<double>()};
      out.optimizer = OptimizerState::for_config(out.params.config, options);
      out.optimizer->step = o.at("step").get<std::int64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed checkpoint header: ") + e.what());
  }
  read_blocks(in, out.params);
  if (out.optimizer) {
    read_blocks(in, out.optimizer->first_moment);
    read_blocks(in, out.optimizer->second_moment);
  }
  return out;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_checkpoint(checkpoint, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace diffged
