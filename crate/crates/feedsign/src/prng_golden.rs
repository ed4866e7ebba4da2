const GOLDEN_SEED_0: [f64; 64] = [
    -4.5275774021745802e-1,
    2.0776603893419193e-1,
    2.6506058120796689e0,
    -4.9042282539864768e-1,
    -9.8860412462432690e-1,
    1.8721013803315418e0,
    2.5246272415061399e-1,
    -1.8534243689692700e0,
    1.5999936337519396e0,
    -4.9739152527728359e-1,
    9.4233404246426705e-2,
    -1.3569967144956832e0,
    -1.0693534511478895e0,
    -3.8626283305702735e-1,
    -8.2506439332625414e-1,
    -9.6245268982623075e-2,
    1.1167402579706125e-1,
    -1.1910766898227900e0,
    9.9331595169005427e-1,
    -1.4784413081788830e0,
    -2.9875086906384529e-1,
    -4.7213374549676640e-1,
    -1.8257765152432220e-1,
    3.3587057177019231e-1,
    -4.7851380148015049e-1,
    -2.4632313710417397e-1,
    -2.6853844341091504e-2,
    1.3296825699177526e0,
    8.6248219525317438e-1,
    -3.9964538972779484e-1,
    7.1038394189000528e-2,
    3.3511668375034964e-1,
    2.4365698120122516e0,
    3.2145623898243891e-1,
    -5.3279790014941752e-1,
    3.3034348072683850e-1,
    1.5234782738832595e-1,
    1.6441311096373787e0,
    -4.8721707689312255e-1,
    1.2042420358315014e0,
    1.0187330134495807e0,
    5.2254944700077011e-1,
    2.3647931973130492e0,
    1.1722299122704805e0,
    6.0124270482875464e-1,
    -3.0391308667719374e-1,
    -1.4198768375052839e0,
    8.9630132413533958e-1,
    8.1413045920550120e-1,
    9.2989439884299996e-1,
    3.3401244272308339e-1,
    -3.4823839723231903e-1,
    2.0212439328838991e0,
    1.9096153013018669e-1,
    -5.4544312018088359e-1,
    -4.2781105970032263e-1,
    6.6910031132486358e-1,
    -1.7011996396111422e0,
    -9.6213039609369588e-4,
    -3.0120816453424876e-1,
    -1.9877528304018005e-1,
    3.3276126279196522e-1,
    1.2570442016434678e0,
    -1.1206451816827789e0,
];
const GOLDEN_SEED_1: [f64; 64] = [
    -2.8249746095854695e-2,
    -1.0656176484143260e0,
    -2.2791952286763470e-1,
    8.3094168471500904e-2,
    1.0309095168573973e-1,
    -1.2696620408584176e0,
    -5.0620407451131844e-1,
    -7.3884947331568002e-2,
    4.3214324082000821e-1,
    -1.5232261433237353e0,
    -1.0614424580887507e0,
    -8.2783876862360151e-1,
    -1.2327176685508674e0,
    -2.3578766406743809e-1,
    6.4169535711434578e-1,
    1.1174130223970447e0,
    3.7359542643054811e-1,
    -8.5813693937195268e-1,
    6.5418083308300046e-1,
    -5.8169068051213013e-1,
    2.0333281432448942e0,
    1.1414834068144408e0,
    8.4740115893370482e-1,
    8.2749870399551939e-1,
    1.5092079618042051e0,
    4.6846054936460191e-1,
    -2.5978576659862079e-1,
    -1.1214589227161340e0,
    2.5014701792847558e0,
    -3.5399187686631278e-2,
    -8.6784003698684453e-1,
    -5.2504969851864780e-1,
    -1.2603229982183368e0,
    5.0830250840767910e-1,
    -1.6283954627352202e0,
    -3.0806118245200681e-1,
    -1.2240665798766218e-2,
    -1.1039352017786159e0,
    -3.1030192162617154e-1,
    -5.5264518520726091e-1,
    -1.4165493807702845e-1,
    -5.2662353375840742e-1,
    -9.4374671923102860e-1,
    -1.4121388136548449e0,
    2.8217279662106703e-1,
    -4.4878992925000005e-1,
    8.1050331695240985e-1,
    1.2627095572294367e0,
    4.0405031231225769e-1,
    -2.4693876928382869e-1,
    1.0482368393041754e0,
    1.1387748224401151e0,
    1.3932993712928885e0,
    -5.4988579952034788e-1,
    1.1632235830775646e0,
    7.1514705386171007e-1,
    5.5912051036019317e-1,
    8.2805396377574092e-1,
    2.0709892525400417e-1,
    -2.0550384630094776e-1,
    1.0298496360835629e0,
    4.7178898545866310e-1,
    -7.3717389532402966e-1,
    -1.6024391782251277e-1,
];
const GOLDEN_SEED_2POW63: [f64; 64] = [
    1.7296665463814775e-1,
    -1.5823309107099377e0,
    -8.0444824683675131e-1,
    1.1315603020317639e0,
    -7.9871839217015006e-1,
    2.3228509144059224e0,
    -8.5082001735110457e-1,
    7.5929237485099332e-1,
    -6.1144812595253506e-1,
    5.6231833000550591e-1,
    -8.4470136680476238e-1,
    7.1849416387163656e-1,
    1.2749135438666540e-1,
    -1.2870817256147624e0,
    -6.3759750923752812e-1,
    1.8371483796110768e0,
    2.4343612069181210e-2,
    3.8345948771612481e-1,
    -1.3499201913647257e-1,
    -1.5832799366396471e0,
    -4.6013922412307909e-2,
    -5.5975084155348376e-1,
    2.2954194073087841e-1,
    -1.2427250852390548e0,
    5.3815177295304084e-1,
    -2.4932614489304399e0,
    2.6723709275234697e-1,
    -8.3759819202630714e-1,
    9.5130463698158441e-1,
    1.2613320204313840e0,
    4.0787999037758554e-1,
    -2.3900650692732133e0,
    6.9403510781997990e-1,
    -6.2221456457133249e-2,
    -5.0676709365414840e-1,
    2.0881727852097184e-1,
    -1.4390843400632236e0,
    -1.9323113402316117e0,
    4.0210569894557291e-1,
    -9.4261715401501051e-2,
    7.6513077368498539e-1,
    1.0949735646047913e0,
    2.1144015131400981e-1,
    -1.2388061797474161e-1,
    5.2673978704150659e-1,
    1.5112017586336741e0,
    -1.2186183578864364e-2,
    -5.3619411511457449e-1,
    -7.3787971514490147e-1,
    -5.6173375483878496e-1,
    6.9710202466512550e-1,
    1.6923119288658001e-1,
    2.4780442339859457e-1,
    -2.7887749641607444e-2,
    1.8512900236792015e-2,
    6.6168457865349584e-1,
    -6.7898174323191485e-1,
    -2.0581877173500298e0,
    4.5337752684364846e-1,
    -6.8106030132684559e-1,
    3.3292004498964223e-1,
    4.4734314165085221e-1,
    3.3619648030110270e-2,
    1.3697062656956753e0,
];
