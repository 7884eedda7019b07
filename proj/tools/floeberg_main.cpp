// SPDX-License-Identifier: Apache-2.0
// Command-line front end. Talks to the library only through the C API.
#include "floeberg/floeberg.h"

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace {

std::vector<std::string> commands() {
  std::vector<std::string> out;
  for (const char *p = floeberg_command_names(); *p; p += out.back().size() + 1)
    out.emplace_back(p);
  return out;
}

int report(floeberg_status s) {
  std::fprintf(stderr, "floeberg: %s: %s\n", floeberg_status_name(s),
               floeberg_last_error());
  return floeberg_exit_code(s);
}

} // namespace

int main(int argc, char **argv) {
  const auto names = commands();
  std::string joined;
  for (const auto &n : names)
    joined += (joined.empty() ? "" : "|") + n;

  CLI::App app{"Photon altimetry sea-ice classification and freeboard pipeline"};
  app.set_version_flag("--version", floeberg_version());
  std::string command;
  app.add_option("command", command, joined)->required()->check(CLI::IsMember(names));

  std::string config_file;
  app.add_option("--config", config_file, "key = value configuration file");
  std::vector<std::string> assignments;
  app.add_option("--set", assignments, "override any configuration key (key=value)");

  // One flag per configuration key; --output also answers to -o.
  std::map<std::string, std::string> flags;
  for (std::size_t i = 0; i < floeberg_config_key_count(); ++i) {
    const std::string key = floeberg_config_key_name(i);
    std::string names_spec = "--" + key;
    if (key == "output")
      names_spec = "-o,--output";
    std::string help = floeberg_config_key_help(i);
    if (*floeberg_config_key_default(i))
      help += std::string(" [") + floeberg_config_key_default(i) + "]";
    app.add_option(names_spec, flags[key], help)->group(
        key == "workers" || key == "seed" || key == "output" ? "Global" : "Settings");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    // Usage errors are validation failures; --help and --version succeed.
    return app.exit(e) == 0 ? 0 : 3;
  }

  floeberg_context *raw = nullptr;
  if (auto s = floeberg_context_new(&raw); s != FLOEBERG_OK)
    return report(s);
  std::unique_ptr<floeberg_context, decltype(&floeberg_context_free)> ctx(
      raw, floeberg_context_free);

  if (!config_file.empty())
    if (auto s = floeberg_context_load_config(ctx.get(), config_file.c_str());
        s != FLOEBERG_OK)
      return report(s);
  for (const auto &[key, value] : flags) {
    if (app.get_option(key == "output" ? "--output" : "--" + key)->count() == 0)
      continue;
    if (auto s = floeberg_context_set(ctx.get(), key.c_str(), value.c_str());
        s != FLOEBERG_OK)
      return report(s);
  }
  for (const auto &a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "floeberg: --set expects key=value, got '%s'\n", a.c_str());
      return 3;
    }
    const auto key = a.substr(0, eq), value = a.substr(eq + 1);
    if (auto s = floeberg_context_set(ctx.get(), key.c_str(), value.c_str());
        s != FLOEBERG_OK)
      return report(s);
  }

  if (auto s = floeberg_context_run(ctx.get(), command.c_str()); s != FLOEBERG_OK)
    return report(s);
  std::fputs(floeberg_context_log(ctx.get()), stdout);
  for (std::size_t i = 0; i < floeberg_context_product_count(ctx.get()); ++i)
    std::printf("wrote %s\n", floeberg_context_product(ctx.get(), i));
  return 0;
}
