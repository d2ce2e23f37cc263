// Plans one transport-in-clutter scene with MOSAIC, re-validates the plan and writes an SVG.

#include <iostream>

#include "mosaic/mosaic.hpp"

int main(int argc, char** argv) {
    using namespace mosaic;
    const std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 0;
    const Scenario sc = make_scenario(Family::clutter, seed);
    const SkillLibrary lib(sc, default_skill_config(Family::clutter));

    OracleConfig oracle;
    oracle.seed = seed;
    const PlanResult r = plan_mosaic(sc, lib, oracle, PlanBudget{10000});
    if (!r.success) {
        std::cout << sc.id << ": no plan (" << r.reason << ")\n";
        return 1;
    }
    std::cout << sc.id << ": " << r.plan->steps.size() << " steps after " << r.iterations << " iterations\n";
    for (const auto& st : r.plan->steps) std::cout << "  " << to_string(st.kind) << ' ' << to_string(st.skill) << '\n';

    const PlanValidation v = validate_plan(sc, lib, *r.plan);
    std::cout << "validation: " << (v.ok ? "ok" : v.message) << '\n';
    write_text_file("quickstart_plan.svg", render_svg(parse_snapshot(plan_snapshot(sc, *r.plan))));
    return v.ok ? 0 : 1;
}
