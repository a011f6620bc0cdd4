// Copyright 2026 The cvqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "cli/json_config.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <utility>

namespace cvqkd::cli {

namespace {

using nlohmann::json;

const CLI::App* active_subcommand(const CLI::App* root) {
  const auto subs = root->get_subcommands();
  return subs.empty() ? nullptr : subs.front();
}

std::string option_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

std::vector<std::string> inputs_of(const json& value) {
  if (value.is_string()) return {value.get<std::string>()};
  if (value.is_boolean()) return {value.get<bool>() ? "true" : "false"};
  if (value.is_number()) return {value.dump()};
  if (value.is_array()) {
    std::vector<std::string> out;
    for (const json& v : value) {
      auto one = inputs_of(v);
      out.insert(out.end(), one.begin(), one.end());
    }
    return out;
  }
  throw CLI::ConversionError("unsupported config value: " + value.dump());
}

// Options that may not both be given; a command-line value for either one
// suppresses both from the file.
constexpr std::array<std::pair<const char*, const char*>, 1> kExclusive{
    {{"t", "loss-db"}}};

bool suppressed(const CLI::App* sub, const std::string& key) {
  for (const auto& [a, b] : kExclusive) {
    if (key != a && key != b) continue;
    for (const char* name : {a, b}) {
      const CLI::Option* opt = sub->get_option_no_throw(std::string("--") + name);
      if (opt != nullptr && opt->count() > 0) return true;
    }
  }
  return false;
}

}  // namespace

std::string JsonConfig::to_config(const CLI::App* app, bool default_also,
                                  bool /*write_description*/,
                                  std::string /*prefix*/) const {
  json out = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      out[opt->get_lnames().front()] =
          results.size() == 1 ? json(results.front()) : json(results);
    } else if (default_also && !opt->get_default_str().empty()) {
      out[opt->get_lnames().front()] = opt->get_default_str();
    }
  }
  return out.dump(2) + "\n";
}

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
  json doc;
  try {
    doc = json::parse(input);
  } catch (const json::parse_error& e) {
    throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw CLI::ConversionError("config must be a JSON object");

  const CLI::App* sub = active_subcommand(root_);
  std::vector<CLI::ConfigItem> items;
  if (sub == nullptr) return items;
  const std::string sub_name = sub->get_name();

  auto emit = [&](const std::string& raw_key, const json& value) {
    const std::string key = option_key(raw_key);
    if (suppressed(sub, key)) return;
    CLI::ConfigItem item;
    item.parents = {sub_name};
    item.name = key;
    item.inputs = inputs_of(value);
    items.push_back(std::move(item));
  };

  for (const auto& [key, value] : doc.items()) {
    if (!value.is_object()) {
      emit(key, value);
    } else if (key == sub_name) {
      for (const auto& [inner_key, inner] : value.items()) emit(inner_key, inner);
    }
  }
  return items;
}

}  // namespace cvqkd::cli
