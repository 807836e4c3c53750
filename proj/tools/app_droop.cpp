// Droop-controller test app, grid-bound only (no packet traffic). Its
// published rule, which tests use as the oracle:
//     p_kw = 50 * (1.0 - v_pu)
// i.e. it sheds 0.5 kW per percent of overvoltage and adds load under
// undervoltage, relative to its base.

#include <cstdio>

#include "app_shell.hpp"

int main() {
    gridloop::apps_sil::AppShell shell;
    bool pending = false;
    double setpoint = 0.0;

    shell.on_reading = [&](const gridloop::apps_sil::Json& reading) {
        if (!reading.is_object() || !reading.contains("v_pu")) return;
        setpoint = 50.0 * (1.0 - reading.at("v_pu").get<double>());
        pending = true;
    };
    shell.on_sync = [&]() {
        if (!pending) return;
        char line[64];
        std::snprintf(line, sizeof line, "setpoint {\"p_kw\":%.17g}", setpoint);
        shell.say(line);
        pending = false;
    };
    return shell.run();
}
