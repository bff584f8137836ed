#include "aftrl.h"

#include <exception>
#include <functional>
#include <new>
#include <string>

#include "core/commands.hpp"
#include "core/config.hpp"

namespace {

thread_local std::string g_last_error;

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kIoError = 3;
constexpr int kNumericError = 4;

int guard(const std::function<void()>& fn) {
    try {
        fn();
        g_last_error.clear();
        return kOk;
    } catch (const aftrl::ConfigError& e) {
        g_last_error = e.what();
        return kConfigError;
    } catch (const aftrl::IoError& e) {
        g_last_error = e.what();
        return kIoError;
    } catch (const aftrl::NumericError& e) {
        g_last_error = e.what();
        return kNumericError;
    } catch (const aftrl::ShapeError& e) {
        g_last_error = e.what();
        return kConfigError;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return kConfigError;
    }
}

}  // namespace

struct aftrl_config {
    aftrl::KeyValueConfig kv;
};

extern "C" {

aftrl_config* aftrl_config_new(void) { return new (std::nothrow) aftrl_config(); }

void aftrl_config_free(aftrl_config* cfg) { delete cfg; }

int aftrl_config_load(aftrl_config* cfg, const char* path) {
    if (!cfg || !path) {
        g_last_error = "null argument";
        return kConfigError;
    }
    return guard([&] { cfg->kv.load_file(path); });
}

int aftrl_config_set(aftrl_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) {
        g_last_error = "null argument";
        return kConfigError;
    }
    return guard([&] { cfg->kv.set(key, value); });
}

#define AFTRL_DEFINE_CMD(c_name, cpp_name)                               \
    int c_name(const aftrl_config* cfg) {                                \
        if (!cfg) {                                                      \
            g_last_error = "null config";                                \
            return kConfigError;                                         \
        }                                                                \
        return guard([&] { cpp_name(aftrl::build_cli_config(cfg->kv)); }); \
    }

AFTRL_DEFINE_CMD(aftrl_cmd_collect_data, aftrl::cmd_collect_data)
AFTRL_DEFINE_CMD(aftrl_cmd_pretrain, aftrl::cmd_pretrain)
AFTRL_DEFINE_CMD(aftrl_cmd_gen_perturb, aftrl::cmd_gen_perturb)
AFTRL_DEFINE_CMD(aftrl_cmd_finetune, aftrl::cmd_finetune)
AFTRL_DEFINE_CMD(aftrl_cmd_eval, aftrl::cmd_eval)
AFTRL_DEFINE_CMD(aftrl_cmd_sweep, aftrl::cmd_sweep)

#undef AFTRL_DEFINE_CMD

const char* aftrl_last_error(void) { return g_last_error.c_str(); }

const char* aftrl_version(void) { return "0.1.0"; }

}  // extern "C"
