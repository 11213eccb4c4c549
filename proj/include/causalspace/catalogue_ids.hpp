#pragma once

#include <cstdint>
#include <vector>

namespace causalspace {

// Representatives of the 102 classes of causally complete spaces on 3 events,
// indexed by their catalogue number. Generated by tools/dev/gen_catalogue_ids.
inline const std::vector<std::uint64_t>& catalogue_representatives() {
    static const std::vector<std::uint64_t> reps{
        4295033110ull, 21475165522ull, 1103823438358ull, 1172543964774ull,
        1103873770006ull, 4295033190ull, 1172542916198ull, 1121003569746ull,
        4402408653334ull, 73031288422ull, 1172542915174ull, 1121053901394ull,
        1125281497446ull, 4312860262ull, 1103823439462ull, 1172547110438ull,
        1103823438438ull, 1254130516326ull, 4401922326ull, 4311811686ull,
        6665806087702ull, 6682985955862ull, 73050358118ull, 1172593246822ull,
        4471077798502ull, 25769869670ull, 1378705540646ull, 1125298602342ull,
        1511828554086ull, 1103873770086ull, 2353642144102ull, 1103913551382ull,
        1103909618198ull, 4295034470ull, 4471128130150ull, 1378705539622ull,
        2284941738262ull, 1172597441062ull, 25786648166ull, 1176856953110ull,
        4475375059222ull, 25787629846ull, 4681532245606ull, 4423834206822ull,
        1194107863318ull, 4401922406ull, 4402408653414ull, 2353658922598ull,
        4402444501526ull, 1168267018518ull, 2284945670422ull, 1172633028198ull,
        1172629095014ull, 1378755871270ull, 1395885670946ull, 4488262124066ull,
        4423833158246ull, 1125317345638ull, 25769870950ull, 1176927994134ull,
        4698712113702ull, 1103913551462ull, 1103909618278ull, 1254166364518ull,
        2353642145382ull, 1254153519462ull, 1511864402198ull, 1511851557142ull,
        1168338059542ull, 2285029556502ull, 6665812312342ull, 4471163978342ull,
        1529031688486ull, 1383015383398ull, 4423883489894ull, 25792872806ull,
        1125388386662ull, 25770198630ull, 4401923686ull, 4402444501606ull,
        1511864402278ull, 1511851557222ull, 1254237405542ull, 2353677992294ull,
        1511935443222ull, 6683072135702ull, 1168338060626ull, 6665812313426ull,
        25805719142ull, 1511935443302ull, 7009422541158ull, 2353677993574ull,
        7009493582102ull, 6751791612438ull, 25876760166ull, 4681550268006ull,
        4423919338086ull, 2353749034598ull, 7009493582182ull, 6751791612518ull,
        7009493583462ull, 7026673713702ull,
    };
    return reps;
}

}  // namespace causalspace
